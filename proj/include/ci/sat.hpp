#pragma once

#include "ci/random.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace ci {

using Var = std::uint32_t;  // 1-based
using Lit = std::int32_t;   // ±var, DIMACS convention

/// Propositional formula AST.  Variables are 1-based and dense within a
/// formula context.
struct BoolFormula {
    enum class Op { Var, Const, Not, And, Or, Xor, Implies, Iff };

    Op op = Op::Const;
    Var var = 0;
    bool value = false;
    std::shared_ptr<std::vector<BoolFormula>> children;

    static BoolFormula make_var(Var v);
    static BoolFormula constant(bool b);
    static BoolFormula negate(BoolFormula f);
    static BoolFormula conj(std::vector<BoolFormula> fs);
    static BoolFormula disj(std::vector<BoolFormula> fs);
    static BoolFormula exclusive(std::vector<BoolFormula> fs);
    static BoolFormula implies(BoolFormula a, BoolFormula b);
    static BoolFormula iff(BoolFormula a, BoolFormula b);

    /// Evaluates under a full assignment (index 0 unused).
    bool eval(const std::vector<bool>& assignment) const;

    Var max_var() const;
};

struct CnfFormula {
    Var var_count = 0;
    std::vector<std::vector<Lit>> clauses;
    /// Variables that define word identity for counting/sampling.
    std::vector<Var> projection_set;

    void add_clause(std::vector<Lit> clause);
    Var fresh_var() { return ++var_count; }
};

/// Equisatisfiable clause form with fresh definition variables; models
/// projected onto the original variables are exactly the models of `f`.
CnfFormula to_cnf(const BoolFormula& f, std::vector<Var> projection_vars);

struct XorConstraint {
    std::vector<Var> vars;
    bool parity = false;
};

/// Appends parity constraints compiled to 3-literal CNF chains.
CnfFormula add_xor_constraints(const CnfFormula& c,
                               const std::vector<XorConstraint>& constraints);

/// Uniformly random XOR over the projection set (each variable with
/// probability 1/2, random parity bit).
XorConstraint random_xor(const std::vector<Var>& projection, RandomBits& rng);

enum class SolveStatus { Sat, Unsat, ResourceLimit };

struct SolveResult {
    SolveStatus status = SolveStatus::ResourceLimit;
    std::vector<bool> model;  // index 0 unused; valid when Sat
};

/// CnfFormula → sat(model) | unsat | resource-limit.
class SolverOracle {
public:
    virtual ~SolverOracle() = default;
    virtual SolveResult solve(const CnfFormula& c) = 0;
    virtual std::string backend_id() const = 0;
};

/// Built-in CDCL solver; complete at the scales this library targets.
class InternalSolver final : public SolverOracle {
public:
    explicit InternalSolver(std::uint64_t conflict_limit = 0)
        : conflict_limit_(conflict_limit) {}
    SolveResult solve(const CnfFormula& c) override;
    std::string backend_id() const override { return "internal"; }

private:
    std::uint64_t conflict_limit_;  // 0 = unlimited
};

/// Shells out to an executable that reads DIMACS on a file argument and
/// prints "s SATISFIABLE"/"s UNSATISFIABLE" with "v" model lines.
class ExternalSolver final : public SolverOracle {
public:
    explicit ExternalSolver(std::string executable) : exe_(std::move(executable)) {}
    SolveResult solve(const CnfFormula& c) override;
    std::string backend_id() const override { return "external:" + exe_; }

private:
    std::string exe_;
};

std::unique_ptr<SolverOracle> make_solver(const std::string& spec);

/// Solves and, in checked builds, asserts the model satisfies every clause.
SolveResult solve(SolverOracle& oracle, const CnfFormula& c);

bool model_satisfies(const CnfFormula& c, const std::vector<bool>& model);

using ProjectedModel = std::vector<bool>;  // aligned with projection_set order

/// Distinct projected models via blocking clauses; exact and complete when
/// fewer than `cap` exist (second member of the result is true then).
std::pair<std::vector<ProjectedModel>, bool> enumerate_projected_models(
    SolverOracle& oracle, const CnfFormula& c, std::size_t cap);

/// DIMACS with "c ind ... 0" projection comment lines.
std::string to_dimacs(const CnfFormula& c);

}  // namespace ci
