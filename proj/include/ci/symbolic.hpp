#pragma once

#include "ci/automata.hpp"
#include "ci/count_sample.hpp"
#include "ci/improvise.hpp"
#include "ci/sat.hpp"

#include <cstdint>
#include <map>
#include <optional>

namespace ci {

/// Transition system over bit-vector states and inputs given by init/acc/
/// delta formulas; accepts words with NFA semantics.
///
/// Formula variable convention (1-based): state bits x0..x_{n-1} are vars
/// 1..n, input bits a0..a_{m-1} are vars n+1..n+m, next-state bits
/// y0..y_{n-1} are vars n+m+1..n+m+n.  init and acc use only x variables.
struct SymbolicAutomaton {
    std::size_t state_bits = 1;
    std::size_t input_bits = 1;
    BoolFormula init;
    BoolFormula acc;
    BoolFormula delta;
    Alphabet alphabet;
    /// m-bit input pattern (bit 0 = a0) → alphabet symbol; patterns absent
    /// from the map are invalid inputs.
    std::map<std::uint64_t, Symbol> symbol_decode;

    Var x_var(std::size_t i) const { return static_cast<Var>(1 + i); }
    Var a_var(std::size_t i) const { return static_cast<Var>(1 + state_bits + i); }
    Var y_var(std::size_t i) const {
        return static_cast<Var>(1 + state_bits + input_bits + i);
    }
    bool decode_covers_all() const {
        return symbol_decode.size() == (std::uint64_t{1} << input_bits);
    }
};

struct UnrolledFormula {
    CnfFormula cnf;
    std::size_t steps = 0;  // maximum word length n
    std::vector<std::vector<Var>> state_blocks;  // n+1 blocks of state bits
    std::vector<std::vector<Var>> input_blocks;  // n blocks of input bits
    std::vector<Var> length_selectors;           // one-hot, length ∈ 0..n
};

struct DiameterResult {
    std::size_t diameter = 0;
    enum class Method { ExhaustedSearch, UserSupplied } method = Method::ExhaustedSearch;
};

struct ApproxCountResult {
    bool is_infinite = false;
    Int estimate = 0;
    bool exact = false;  // true when the full model list fit under the pivot

    CountValue as_count() const {
        return is_infinite ? CountValue::infinite() : CountValue::finite(estimate);
    }
};

/// Named constants of the hash-counting recipe.
std::size_t counting_pivot(const Rat& tau);
std::size_t counting_repetitions(double delta);

/// Binary encoding of an explicit DFA; language-equivalent by construction.
SymbolicAutomaton encode_dfa(const Dfa& d);

/// Conjunction product over the pair state space (shared inputs; the two
/// automata must agree on input encoding).
SymbolicAutomaton symbolic_product(const SymbolicAutomaton& a, const SymbolicAutomaton& b);

/// Same product but accepting where `b` rejects; sound complement only when
/// b's transition formula is deterministic and complete.
SymbolicAutomaton symbolic_product_negated(const SymbolicAutomaton& a,
                                           const SymbolicAutomaton& b);

/// SAT check: some (state, input) has two distinct successors, or there are
/// two distinct initial states.
bool symbolic_is_nondeterministic(const SymbolicAutomaton& s, SolverOracle& oracle);

/// Accepting paths of length ≤ n; projected models (inputs + length
/// selectors, inactive steps zero-padded) biject with accepted words.
UnrolledFormula unroll(const SymbolicAutomaton& s, std::size_t n);

Word decode_projected_model(const SymbolicAutomaton& s, const UnrolledFormula& u,
                            const ProjectedModel& model);

/// BMC membership query at exact length |w|.
bool symbolic_accepts(const SymbolicAutomaton& s, const Word& w, SolverOracle& oracle);

/// Iterates simple-accepting-path queries n = 1, 2, … until unsat; throws
/// ResourceError past `cap`.
DiameterResult diameter(const SymbolicAutomaton& s, SolverOracle& oracle, std::size_t cap);

/// One query for words x, y, z (|x|,|y|,|z| ≤ D, |y| ≥ 1) reaching a state,
/// looping, and reaching acceptance; satisfiable ⇔ infinite language.
bool symbolic_is_infinite(const SymbolicAutomaton& s, SolverOracle& oracle, std::size_t D);

/// Witness words from the accepting-cycle query; requires infinite language.
PumpWitness symbolic_pump_witness(const SymbolicAutomaton& s, SolverOracle& oracle,
                                  std::size_t D);

/// XOR-hash projected counting on the unrolling, accurate within a factor
/// 1+τ with probability ≥ 1−δ.
ApproxCountResult approx_count(const SymbolicAutomaton& s, SolverOracle& oracle,
                               const Rat& tau, double delta, std::size_t D,
                               RandomBits& rng);

/// Hash-cell sampler, uniform up to a factor 1+τ per word.  Exactly uniform
/// (and exact-metadata) when the whole language fits under the pivot.
SamplerPtr almost_uniform_sampler(const SymbolicAutomaton& s,
                                  std::shared_ptr<SolverOracle> oracle, const Rat& tau,
                                  std::size_t D, RandomBits& rng);

SamplerPtr symbolic_pump_sampler(const SymbolicAutomaton& s, SolverOracle& oracle,
                                 const Int& n, std::size_t D);

struct SymbolicConfig {
    Rat tau = 7;
    double delta = 0.2;
    std::optional<std::size_t> diameter_bound;  // skips the diameter search
    std::size_t diameter_cap = 64;
};

/// Approximate scheme: estimates |A| and |I| each at confidence
/// (1−δ)^(1/2), then dispatches as in the explicit scheme; certified ρ
/// degrades by (1+τ)² ((1+τ)²(1+ε) in the finite-|I| mixture case).
SynthesisResult synthesize_symbolic(const SymbolicAutomaton& improv,
                                    const SymbolicAutomaton& admiss, const Rat& epsilon,
                                    const Rat& rho, const SymbolicConfig& config,
                                    std::shared_ptr<SolverOracle> oracle, RandomBits& rng);

// Symbolic automaton JSON: state_bits, input_bits, init/acc/delta in prefix
// syntax over x<i>/a<i>/y<i>, symbol_decode as [{bits, symbol}].
SymbolicAutomaton parse_symbolic_json(const std::string& text);
std::string symbolic_to_json(const SymbolicAutomaton& s);

/// Prefix formula syntax: variable, "true", "false", or
/// "(op expr...)" with op ∈ {not, and, or, xor}.
BoolFormula parse_prefix_formula(const std::string& text, const SymbolicAutomaton& ctx,
                                 bool allow_inputs, bool allow_next);

}  // namespace ci
