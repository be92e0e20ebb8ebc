#pragma once

// Shared fixtures: the length-3 no-"11" language and its Hamming-ball
// admissibility DFA, small classics (Σ*, a*b, chains), random automaton
// generators, and brute-force enumeration oracles.

#include "ci/automata.hpp"
#include "ci/count_sample.hpp"
#include "ci/random.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace fixtures {

inline ci::Alphabet binary() { return ci::Alphabet({"0", "1"}); }
inline ci::Alphabet ab() { return ci::Alphabet({"a", "b"}); }

inline ci::Word word_of(const ci::Alphabet& alphabet, const std::string& chars) {
    ci::Word w;
    for (char c : chars) w.push_back(*alphabet.index(std::string(1, c)));
    return w;
}

/// Length-3 binary strings that avoid the factor "11"; language
/// {000, 001, 010, 100, 101}.  State = position * 2 + (last bit was 1).
inline ci::Dfa no11_len3() {
    ci::Dfa d;
    d.alphabet = binary();
    d.state_count = 8;
    d.initial = 0;
    d.accepting = {6, 7};
    for (ci::State pos = 0; pos < 3; ++pos)
        for (ci::State last = 0; last < 2; ++last)
            for (ci::Symbol b = 0; b < 2; ++b) {
                if (last == 1 && b == 1) continue;
                d.delta[{pos * 2 + last, b}] = (pos + 1) * 2 + b;
            }
    return d;
}

/// Binary strings of length 3 within Hamming distance 1 of 001; language
/// {000, 001, 011, 101}.  State = position * 2 + mismatches.
inline ci::Dfa hamming_001() {
    ci::Dfa d;
    d.alphabet = binary();
    d.state_count = 8;
    d.initial = 0;
    d.accepting = {6, 7};
    const ci::Symbol ref[3] = {0, 0, 1};
    for (ci::State pos = 0; pos < 3; ++pos)
        for (ci::State mm = 0; mm < 2; ++mm)
            for (ci::Symbol b = 0; b < 2; ++b) {
                ci::State mm2 = mm + (b != ref[pos] ? 1 : 0);
                if (mm2 > 1) continue;
                d.delta[{pos * 2 + mm, b}] = (pos + 1) * 2 + mm2;
            }
    return d;
}

inline ci::Dfa sigma_star(const ci::Alphabet& alphabet) {
    return ci::universal_dfa(alphabet);
}

/// a*b over {a, b}.
inline ci::Dfa astar_b() {
    ci::Dfa d;
    d.alphabet = ab();
    d.state_count = 2;
    d.initial = 0;
    d.accepting = {1};
    d.delta[{0, 0}] = 0;
    d.delta[{0, 1}] = 1;
    return d;
}

inline ci::Dfa empty_language(const ci::Alphabet& alphabet) {
    ci::Dfa d;
    d.alphabet = alphabet;
    d.state_count = 1;
    d.initial = 0;
    return d;  // no accepting states
}

/// Chain of k transitions on symbol 0; accepting set configurable.
inline ci::Dfa chain(const ci::Alphabet& alphabet, std::size_t k, bool all_accepting) {
    ci::Dfa d;
    d.alphabet = alphabet;
    d.state_count = static_cast<ci::State>(k + 1);
    d.initial = 0;
    for (std::size_t i = 0; i < k; ++i) {
        d.delta[{static_cast<ci::State>(i), 0}] = static_cast<ci::State>(i + 1);
        if (all_accepting) d.accepting.insert(static_cast<ci::State>(i));
    }
    d.accepting.insert(static_cast<ci::State>(k));
    return d;
}

inline ci::Dfa random_dfa(ci::RandomBits& rng, std::size_t max_states,
                          std::size_t alphabet_size = 2) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < alphabet_size; ++i) labels.push_back(std::to_string(i));
    ci::Dfa d;
    d.alphabet = ci::Alphabet(labels);
    d.state_count = static_cast<ci::State>(1 + rng.below(max_states));
    d.initial = static_cast<ci::State>(rng.below(d.state_count));
    for (ci::State s = 0; s < d.state_count; ++s) {
        if (rng.below(2)) d.accepting.insert(s);
        for (ci::Symbol a = 0; a < alphabet_size; ++a)
            if (rng.below(4) < 3)  // 3/4 transition density
                d.delta[{s, a}] = static_cast<ci::State>(rng.below(d.state_count));
    }
    return d;
}

inline ci::Nfa random_nfa(ci::RandomBits& rng, std::size_t max_states,
                          std::size_t alphabet_size = 2, bool with_eps = false) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < alphabet_size; ++i) labels.push_back(std::to_string(i));
    ci::Nfa n;
    n.alphabet = ci::Alphabet(labels);
    n.state_count = static_cast<ci::State>(1 + rng.below(max_states));
    n.initial_set.insert(static_cast<ci::State>(rng.below(n.state_count)));
    for (ci::State s = 0; s < n.state_count; ++s) {
        if (rng.below(2)) n.accepting.insert(s);
        for (ci::Symbol a = 0; a < alphabet_size; ++a) {
            std::size_t targets = rng.below(3);  // 0..2 successors
            for (std::size_t t = 0; t < targets; ++t)
                n.delta[{s, a}].insert(static_cast<ci::State>(rng.below(n.state_count)));
        }
        if (with_eps && rng.below(4) == 0)
            n.eps[s].insert(static_cast<ci::State>(rng.below(n.state_count)));
    }
    return n;
}

/// All words of length ≤ max_len over the alphabet, in length-then-lex order.
inline std::vector<ci::Word> all_words(std::size_t alphabet_size, std::size_t max_len) {
    std::vector<ci::Word> out{{}};
    std::vector<ci::Word> frontier{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<ci::Word> next;
        for (const auto& w : frontier)
            for (ci::Symbol a = 0; a < alphabet_size; ++a) {
                ci::Word v = w;
                v.push_back(a);
                next.push_back(v);
            }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

template <typename Automaton>
std::vector<ci::Word> brute_force_language(const Automaton& a, std::size_t max_len) {
    std::vector<ci::Word> out;
    for (const auto& w : all_words(a.alphabet.size(), max_len))
        if (a.accepts(w)) out.push_back(w);
    return out;
}

}  // namespace fixtures
