#include "ci/factor_oracle.hpp"

#include <bit>

namespace ci {

FactorOracle build_factor_oracle(const Alphabet& alphabet, const Word& ref_word) {
    if (ref_word.empty()) throw ConfigError("reference word must be non-empty");
    for (Symbol s : ref_word)
        if (s >= alphabet.size()) throw ConfigError("reference symbol out of alphabet");

    FactorOracle f;
    f.alphabet = alphabet;
    f.ref_word = ref_word;
    for (std::size_t i = 0; i < ref_word.size(); ++i) {
        Symbol sym = ref_word[i];
        State next = static_cast<State>(i + 1);
        f.forward[{static_cast<State>(i), sym}] = next;
        // walk suffix links from state i, adding external transitions where
        // the symbol is missing
        int k = (i == 0) ? -1 : static_cast<int>(f.suffix_link.at(static_cast<State>(i)));
        while (k >= 0 && !f.forward_step(static_cast<State>(k), sym)) {
            f.forward[{static_cast<State>(k), sym}] = next;
            auto it = f.suffix_link.find(static_cast<State>(k));
            k = (it == f.suffix_link.end()) ? -1 : static_cast<int>(it->second);
        }
        f.suffix_link[next] =
            (k < 0) ? 0 : *f.forward_step(static_cast<State>(k), sym);
    }
    return f;
}

Nfa oracle_as_nfa(const FactorOracle& f, bool include_eps_links) {
    Nfa n;
    n.alphabet = f.alphabet;
    n.state_count = f.state_count();
    n.initial_set = {0};
    for (State s = 0; s < n.state_count; ++s) n.accepting.insert(s);
    for (const auto& [key, to] : f.forward) n.delta[key].insert(to);
    if (include_eps_links)
        for (const auto& [from, to] : f.suffix_link) n.eps[from].insert(to);
    return n;
}

Dfa window_admissibility_dfa(const FactorOracle& f, const WindowSpec& w) {
    w.validate();
    const std::size_t histories = std::size_t{1} << w.k;
    const std::size_t mask = histories - 1;
    auto in_bounds = [&](std::size_t hist) {
        unsigned ones = std::popcount(hist);
        return ones >= w.l && ones <= w.h;
    };
    auto id = [&](State oracle_state, std::size_t hist) {
        return static_cast<State>(oracle_state * histories + hist);
    };

    Dfa d;
    d.alphabet = f.alphabet;
    d.state_count = static_cast<State>(f.state_count() * histories);
    d.initial = id(0, 0);
    for (State q = 0; q < f.state_count(); ++q)
        for (std::size_t hist = 0; hist < histories; ++hist) {
            if (!in_bounds(hist)) continue;  // trap: non-accepting, no exits
            d.accepting.insert(id(q, hist));
            for (Symbol sym = 0; sym < f.alphabet.size(); ++sym) {
                auto next = f.forward_step(q, sym);
                if (!next) continue;
                std::size_t bit = (*next == q + 1) ? 0 : 1;
                std::size_t hist2 = ((hist << 1) | bit) & mask;
                d.delta[{id(q, hist), sym}] = id(*next, hist2);
            }
        }
    return d;
}

TransitionClass classify_transition(const FactorOracle& f, State from, Symbol a) {
    auto to = f.forward_step(from, a);
    if (!to) return TransitionClass::None;
    return (*to == from + 1) ? TransitionClass::Direct : TransitionClass::NonDirect;
}

}  // namespace ci
