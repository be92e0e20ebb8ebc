#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ci {

using State = std::uint32_t;
using Symbol = std::uint32_t;  // index into an Alphabet

/// A word is a sequence of symbol indices.
using Word = std::vector<Symbol>;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ordered set of distinct symbol labels; symbols are referred to by their
/// dense 0-based index everywhere else.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(Symbol s) const { return labels_.at(s); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<Symbol> index(const std::string& label) const;

    bool operator==(const Alphabet& o) const { return labels_ == o.labels_; }

    /// Space-separated labels; the empty word renders as "<eps>".
    std::string format_word(const Word& w) const;
    std::optional<Word> parse_word(const std::string& text) const;

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Symbol> index_;
};

/// Deterministic automaton with a partial transition map: a missing
/// (state, symbol) entry rejects the rest of the word.
struct Dfa {
    Alphabet alphabet;
    State state_count = 1;
    State initial = 0;
    std::set<State> accepting;
    std::map<std::pair<State, Symbol>, State> delta;

    std::optional<State> step(State s, Symbol a) const {
        auto it = delta.find({s, a});
        if (it == delta.end()) return std::nullopt;
        return it->second;
    }
    bool accepts(const Word& w) const;
    void validate() const;
};

struct Nfa {
    Alphabet alphabet;
    State state_count = 1;
    std::set<State> initial_set;
    std::set<State> accepting;
    std::map<std::pair<State, Symbol>, std::set<State>> delta;
    std::map<State, std::set<State>> eps;

    std::set<State> eps_closure(const std::set<State>& states) const;
    std::set<State> step(const std::set<State>& states, Symbol a) const;
    bool accepts(const Word& w) const;
    void validate() const;
};

struct TrimReport {
    std::set<State> kept_states;
    std::set<State> removed_unreachable;
    std::set<State> removed_dead;
    /// old state id -> new dense id, for kept states only
    std::map<State, State> renumbering;
};

/// L(result) = L(a) ∩ L(b); the result is trimmed of unreachable states.
Dfa product(const Dfa& a, const Dfa& b);
Nfa product(const Nfa& a, const Nfa& b);

/// Completes the transition map (adding a sink if needed) and flips
/// acceptance: L(result) = Σ* \ L(a).
Dfa complement(const Dfa& a);

/// Removes states not on any initial → accepting path.
std::pair<Dfa, TrimReport> trim(const Dfa& a);
std::pair<Nfa, TrimReport> trim(const Nfa& a);

inline constexpr std::size_t kDefaultDeterminizationCap = std::size_t{1} << 20;

/// Subset construction with eager ε-closure; throws ResourceError when more
/// than `cap` subsets are generated.
Dfa determinize(const Nfa& n, std::size_t cap = kDefaultDeterminizationCap);

/// True iff the trimmed transition graph (ε-edges included) has a cycle.
bool is_language_infinite(const Dfa& a);
bool is_language_infinite(const Nfa& a);

Nfa dfa_to_nfa(const Dfa& d);

/// DFA accepting all of Σ*.
Dfa universal_dfa(const Alphabet& alphabet);

// Automaton JSON interchange. Unknown fields are rejected; kind "pfa" is
// rejected with a diagnostic (feasibility for PFAs is undecidable).
std::string dfa_to_json(const Dfa& d);
std::string nfa_to_json(const Nfa& n);

struct ParsedAutomaton {
    std::optional<Dfa> dfa;
    std::optional<Nfa> nfa;
    bool is_dfa() const { return dfa.has_value(); }
};
ParsedAutomaton parse_automaton_json(const std::string& text);

}  // namespace ci
