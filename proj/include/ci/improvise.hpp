#pragma once

#include "ci/automata.hpp"
#include "ci/count_sample.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace ci {

/// Total word predicate with a name for diagnostics.
struct ComputablePredicate {
    std::string name;
    std::function<bool(const Word&)> fn;
    bool operator()(const Word& w) const { return fn(w); }
};

struct FeasibilityVerdict {
    bool feasible = false;
    CountValue size_I;
    CountValue size_A;
    Rat threshold_I;  // 1/ρ
    Rat threshold_A;  // (1-ε)/ρ
};

struct ImproviserComponent {
    Rat weight;
    SamplerPtr sampler;
};

/// Executable sampler mixture plus the distribution metadata that lets the
/// (ε,ρ) contract be checked analytically.
struct Improviser {
    std::vector<ImproviserComponent> components;
    std::string case_tag;
    Rat certified_epsilon;
    Rat certified_rho;
    /// Exact probability mass on admissible words, or a lower bound.
    Rat admissible_mass;
    bool admissible_mass_exact = true;
    /// True when all component metadata is exact (explicit schemes).
    bool exact_metadata = true;

    Word draw(RandomBits& rng) const;
};

enum class SynthesisStatus { Ok, Infeasible, NotApplicable, BudgetExhausted };

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::Infeasible;
    std::optional<Improviser> improviser;
    std::optional<FeasibilityVerdict> verdict;  // present when infeasible
    std::string detail;                          // for NotApplicable / BudgetExhausted

    bool ok() const { return status == SynthesisStatus::Ok; }
};

void validate_parameters(const Rat& epsilon, const Rat& rho);

/// Condition: |I| ≥ 1/ρ and |A| ≥ (1-ε)/ρ, with ∞ above any rational.
FeasibilityVerdict feasibility(const CountValue& size_I, const CountValue& size_A,
                               const Rat& epsilon, const Rat& rho);

/// Explicit-DFA scheme: case dispatch on (|A|, |I|).
SynthesisResult synthesize_dfa(const Dfa& improv, const Dfa& admiss,
                               const Rat& epsilon, const Rat& rho);

/// Enumerates improvisations in length-then-lex order, classifying by the
/// predicate, until the two coin-flip lists are filled or `budget` words
/// have been examined.
SynthesisResult synthesize_enumerative(const Nfa& improv, const ComputablePredicate& alpha,
                                       const Rat& epsilon, const Rat& rho, Int budget);

/// Tractable NFA cases: infinite product language (pumping), or finite
/// product vs infinite improvisation language (disjoint-by-length mixture),
/// or small enough to determinize.  Anything else is NotApplicable.
SynthesisResult synthesize_nfa_special(const Nfa& improv, const Nfa& admiss,
                                       const Rat& epsilon, const Rat& rho,
                                       std::size_t determinization_cap =
                                           kDefaultDeterminizationCap);

struct VerificationReport {
    std::optional<Rat> analytic_max_prob;         // when metadata is exact & finite
    std::optional<Rat> analytic_admissible_mass;  // same condition
    std::size_t analytic_support_violations = 0;  // support words outside I
    std::size_t draws = 0;
    std::size_t admissible_draws = 0;
    std::size_t membership_violations = 0;
    double admissible_fraction = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    bool contract_holds(const Rat& epsilon, const Rat& rho) const;
};

/// Monte-Carlo plus analytic audit of the improvising-distribution contract.
VerificationReport verify_improviser(const Improviser& imp,
                                     const std::function<bool(const Word&)>& in_improv,
                                     const std::function<bool(const Word&)>& admissible,
                                     std::size_t draws, RandomBits& rng,
                                     std::size_t analytic_support_cap = 10000);

// Builtin predicate registry used by instance files: hamming_leq(ref, d) and
// factor_window(ref, k, l, h).
ComputablePredicate hamming_leq_predicate(const Alphabet& alphabet, const Word& reference,
                                          std::size_t distance);
ComputablePredicate factor_window_predicate(const Alphabet& alphabet, const Word& reference,
                                            std::size_t k, std::size_t l, std::size_t h);

}  // namespace ci
