#pragma once

#include "ci/automata.hpp"
#include "ci/random.hpp"
#include "ci/rational.hpp"

#include <memory>
#include <vector>

namespace ci {

/// An element of ℕ ∪ {∞}.
struct CountValue {
    bool is_infinite = false;
    Int value = 0;  // meaningful only when finite

    static CountValue infinite() { return {true, 0}; }
    static CountValue finite(Int v) { return {false, std::move(v)}; }

    bool operator==(const CountValue& o) const {
        return is_infinite == o.is_infinite && (is_infinite || value == o.value);
    }
    /// Compares against a rational threshold, with ∞ greater than anything.
    bool at_least(const Rat& threshold) const {
        return is_infinite || Rat(value) >= threshold;
    }
    bool less_than(const Rat& threshold) const { return !at_least(threshold); }
    std::string str() const { return is_infinite ? "inf" : value.str(); }
};

/// Number of accepting paths from each state of a trimmed acyclic DFA,
/// counting the word-end option at accepting states.
struct PathCountTable {
    Dfa trimmed;               // the automaton the counts refer to
    std::vector<Int> counts;   // indexed by trimmed state id
    bool language_empty = false;

    const Int& at(State s) const { return counts.at(s); }
    Int total() const { return language_empty ? Int(0) : counts.at(trimmed.initial); }
};

enum class SamplerKind { Uniform, Pumped, HashCell };

/// Draws words from a fixed distribution given an injected random source.
/// Implementations are immutable; callers share them freely and pass their
/// own RandomBits per draw.
class Sampler {
public:
    virtual ~Sampler() = default;
    virtual Word draw(RandomBits& rng) const = 0;
    virtual CountValue support_size() const = 0;
    /// Exact probability of a word; only meaningful when exact_metadata().
    virtual Rat exact_prob(const Word& w) const = 0;
    /// True when exact_prob/support_size are exact rather than estimates.
    virtual bool exact_metadata() const { return true; }
    /// Materialized support, when finite and enumerable.
    virtual std::vector<Word> support() const = 0;
    virtual SamplerKind kind() const = 0;
};

using SamplerPtr = std::shared_ptr<const Sampler>;

struct PumpWitness {
    Word x, y, z;  // |y| >= 1; x yⁱ z accepted for all i
};

/// ∞ iff the trimmed graph has a cycle; otherwise the exact |L(a)|.
CountValue count_words(const Dfa& a);

/// Requires a finite language; p_initial = |L(a)|.
PathCountTable path_counts(const Dfa& a);

/// Exactly uniform over L(a); requires finite non-empty language.
SamplerPtr uniform_sampler(const Dfa& a);

/// Requires an infinite language.  Deterministic tie-break: least witness by
/// (|x|, x, |y|, y, |z|, z) with length-then-lex word order.
PumpWitness find_pump_witness(const Dfa& a);
PumpWitness find_pump_witness(const Nfa& a);

/// Uniform over {x yⁱ z : 0 ≤ i < N}.
SamplerPtr pump_sampler(const Dfa& a, const Int& n);
SamplerPtr pump_sampler(const Nfa& a, const Int& n);
SamplerPtr pump_sampler(const PumpWitness& w, const Int& n);

/// Uniform over {x y^(i+j0) z : 0 ≤ i < N} with j0 minimal such that every
/// support word is longer than min_len.
SamplerPtr pump_sampler_longer_than(const Nfa& a, const Int& n, std::size_t min_len);
SamplerPtr pump_sampler_longer_than(const PumpWitness& w, const Int& n,
                                    std::size_t min_len);

/// Length of the longest accepted word; requires a finite non-empty language.
std::size_t max_word_length(const Dfa& a);

/// Accepted words of length ≤ max_len in length-then-lexicographic order.
std::vector<Word> enumerate_words(const Dfa& a, std::size_t max_len);
std::vector<Word> enumerate_words(const Nfa& a, std::size_t max_len);

/// Single-word or explicit finite distributions used by the enumerative
/// scheme and by tests.
SamplerPtr finite_support_sampler(std::vector<Word> words);  // uniform

}  // namespace ci
