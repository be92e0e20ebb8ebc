#pragma once

#include "ci/automata.hpp"

#include <map>

namespace ci {

/// Automaton built online from a reference word: states 0..N all accepting,
/// a direct chain i → i+1 labelled with the reference word, extra forward
/// transitions added while following suffix links.
struct FactorOracle {
    Alphabet alphabet;
    Word ref_word;
    // deterministic forward transitions, including the chain
    std::map<std::pair<State, Symbol>, State> forward;
    // suffix_link[i] defined for states 1..N
    std::map<State, State> suffix_link;

    State state_count() const { return static_cast<State>(ref_word.size() + 1); }
    std::optional<State> forward_step(State s, Symbol a) const {
        auto it = forward.find({s, a});
        if (it == forward.end()) return std::nullopt;
        return it->second;
    }
};

/// Sliding window over the last k transitions: a word is admissible when the
/// number of non-direct transitions among them stays within [l, h].
struct WindowSpec {
    std::size_t k = 1;
    std::size_t l = 0;
    std::size_t h = 1;

    void validate() const {
        if (k < 1 || l > h || h > k) throw ConfigError("invalid window spec");
    }
};

enum class TransitionClass { Direct, NonDirect, None };

FactorOracle build_factor_oracle(const Alphabet& alphabet, const Word& ref_word);

/// Forward transitions as an NFA; suffix links become ε-edges when requested.
Nfa oracle_as_nfa(const FactorOracle& f, bool include_eps_links);

/// DFA over (oracle state × k-bit transition history).  States whose history
/// popcount leaves [l, h] are trapped, so acceptance at word end implies the
/// window bound held at every step.
Dfa window_admissibility_dfa(const FactorOracle& f, const WindowSpec& w);

TransitionClass classify_transition(const FactorOracle& f, State from, Symbol a);

}  // namespace ci
