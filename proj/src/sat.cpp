#include "ci/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace ci {

// ---------------------------------------------------------------------------
// BoolFormula

namespace {
BoolFormula node(BoolFormula::Op op, std::vector<BoolFormula> fs) {
    BoolFormula f;
    f.op = op;
    f.children = std::make_shared<std::vector<BoolFormula>>(std::move(fs));
    return f;
}
}  // namespace

BoolFormula BoolFormula::make_var(Var v) {
    BoolFormula f;
    f.op = Op::Var;
    f.var = v;
    return f;
}
BoolFormula BoolFormula::constant(bool b) {
    BoolFormula f;
    f.op = Op::Const;
    f.value = b;
    return f;
}
BoolFormula BoolFormula::negate(BoolFormula f) { return node(Op::Not, {std::move(f)}); }
BoolFormula BoolFormula::conj(std::vector<BoolFormula> fs) {
    if (fs.empty()) return constant(true);
    if (fs.size() == 1) return fs[0];
    return node(Op::And, std::move(fs));
}
BoolFormula BoolFormula::disj(std::vector<BoolFormula> fs) {
    if (fs.empty()) return constant(false);
    if (fs.size() == 1) return fs[0];
    return node(Op::Or, std::move(fs));
}
BoolFormula BoolFormula::exclusive(std::vector<BoolFormula> fs) {
    if (fs.empty()) return constant(false);
    if (fs.size() == 1) return fs[0];
    return node(Op::Xor, std::move(fs));
}
BoolFormula BoolFormula::implies(BoolFormula a, BoolFormula b) {
    return node(Op::Implies, {std::move(a), std::move(b)});
}
BoolFormula BoolFormula::iff(BoolFormula a, BoolFormula b) {
    return node(Op::Iff, {std::move(a), std::move(b)});
}

bool BoolFormula::eval(const std::vector<bool>& assignment) const {
    switch (op) {
        case Op::Var: return assignment.at(var);
        case Op::Const: return value;
        case Op::Not: return !(*children)[0].eval(assignment);
        case Op::And:
            for (const auto& c : *children)
                if (!c.eval(assignment)) return false;
            return true;
        case Op::Or:
            for (const auto& c : *children)
                if (c.eval(assignment)) return true;
            return false;
        case Op::Xor: {
            bool acc = false;
            for (const auto& c : *children) acc ^= c.eval(assignment);
            return acc;
        }
        case Op::Implies:
            return !(*children)[0].eval(assignment) || (*children)[1].eval(assignment);
        case Op::Iff:
            return (*children)[0].eval(assignment) == (*children)[1].eval(assignment);
    }
    return false;
}

Var BoolFormula::max_var() const {
    Var m = (op == Op::Var) ? var : 0;
    if (children)
        for (const auto& c : *children) m = std::max(m, c.max_var());
    return m;
}

// ---------------------------------------------------------------------------
// CnfFormula / Tseitin conversion

void CnfFormula::add_clause(std::vector<Lit> clause) {
    for (Lit l : clause)
        if (l == 0 || static_cast<Var>(std::abs(l)) > var_count)
            throw std::invalid_argument("literal out of range");
    clauses.push_back(std::move(clause));
}

namespace {

/// Tseitin encoder: returns a literal equivalent to the subformula, adding
/// definition clauses for fresh variables.
Lit tseitin(const BoolFormula& f, CnfFormula& out) {
    using Op = BoolFormula::Op;
    switch (f.op) {
        case Op::Var:
            return static_cast<Lit>(f.var);
        case Op::Const: {
            Var v = out.fresh_var();
            out.add_clause({f.value ? static_cast<Lit>(v) : -static_cast<Lit>(v)});
            return static_cast<Lit>(v);
        }
        case Op::Not:
            return -tseitin((*f.children)[0], out);
        case Op::And: {
            std::vector<Lit> lits;
            for (const auto& c : *f.children) lits.push_back(tseitin(c, out));
            Lit d = static_cast<Lit>(out.fresh_var());
            std::vector<Lit> big{d};
            for (Lit l : lits) {
                out.add_clause({-d, l});
                big.push_back(-l);
            }
            out.add_clause(big);
            return d;
        }
        case Op::Or: {
            std::vector<Lit> lits;
            for (const auto& c : *f.children) lits.push_back(tseitin(c, out));
            Lit d = static_cast<Lit>(out.fresh_var());
            std::vector<Lit> big{-d};
            for (Lit l : lits) {
                out.add_clause({d, -l});
                big.push_back(l);
            }
            out.add_clause(big);
            return d;
        }
        case Op::Xor: {
            Lit acc = tseitin((*f.children)[0], out);
            for (std::size_t i = 1; i < f.children->size(); ++i) {
                Lit b = tseitin((*f.children)[i], out);
                Lit d = static_cast<Lit>(out.fresh_var());
                // d <-> acc xor b
                out.add_clause({-d, acc, b});
                out.add_clause({-d, -acc, -b});
                out.add_clause({d, -acc, b});
                out.add_clause({d, acc, -b});
                acc = d;
            }
            return acc;
        }
        case Op::Implies: {
            Lit a = tseitin((*f.children)[0], out);
            Lit b = tseitin((*f.children)[1], out);
            Lit d = static_cast<Lit>(out.fresh_var());
            out.add_clause({-d, -a, b});
            out.add_clause({d, a});
            out.add_clause({d, -b});
            return d;
        }
        case Op::Iff: {
            Lit a = tseitin((*f.children)[0], out);
            Lit b = tseitin((*f.children)[1], out);
            Lit d = static_cast<Lit>(out.fresh_var());
            out.add_clause({-d, -a, b});
            out.add_clause({-d, a, -b});
            out.add_clause({d, a, b});
            out.add_clause({d, -a, -b});
            return d;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

CnfFormula to_cnf(const BoolFormula& f, std::vector<Var> projection_vars) {
    CnfFormula out;
    out.var_count = f.max_var();
    for (Var v : projection_vars) out.var_count = std::max(out.var_count, v);
    out.projection_set = std::move(projection_vars);
    if (f.op == BoolFormula::Op::Const) {
        if (!f.value) out.clauses.push_back({});  // explicit ⊥
        return out;
    }
    Lit root = tseitin(f, out);
    out.add_clause({root});
    return out;
}

CnfFormula add_xor_constraints(const CnfFormula& c,
                               const std::vector<XorConstraint>& constraints) {
    CnfFormula out = c;
    for (const auto& xc : constraints) {
        // dedupe: a variable appearing twice cancels
        std::vector<Var> vars = xc.vars;
        std::sort(vars.begin(), vars.end());
        std::vector<Var> kept;
        for (std::size_t i = 0; i < vars.size();) {
            std::size_t j = i;
            while (j < vars.size() && vars[j] == vars[i]) ++j;
            if ((j - i) % 2 == 1) kept.push_back(vars[i]);
            i = j;
        }
        if (kept.empty()) {
            if (xc.parity) out.clauses.push_back({});  // 0 = 1: unsatisfiable
            continue;
        }
        // chain: t_i <-> t_{i-1} xor v_i, then force the final parity
        Lit acc = static_cast<Lit>(kept[0]);
        for (std::size_t i = 1; i < kept.size(); ++i) {
            Lit b = static_cast<Lit>(kept[i]);
            Lit d = static_cast<Lit>(out.fresh_var());
            out.add_clause({-d, acc, b});
            out.add_clause({-d, -acc, -b});
            out.add_clause({d, -acc, b});
            out.add_clause({d, acc, -b});
            acc = d;
        }
        out.add_clause({xc.parity ? acc : -acc});
    }
    return out;
}

XorConstraint random_xor(const std::vector<Var>& projection, RandomBits& rng) {
    XorConstraint xc;
    for (Var v : projection)
        if (rng.bit()) xc.vars.push_back(v);
    xc.parity = rng.bit();
    return xc;
}

// ---------------------------------------------------------------------------
// Internal CDCL solver

namespace {

class Cdcl {
public:
    Cdcl(const CnfFormula& cnf, std::uint64_t conflict_limit)
        : nvars_(cnf.var_count), limit_(conflict_limit) {
        watches_.resize(2 * (nvars_ + 1));
        assign_.assign(nvars_ + 1, 0);
        level_.assign(nvars_ + 1, 0);
        reason_.assign(nvars_ + 1, -1);
        activity_.assign(nvars_ + 1, 0.0);
        phase_.assign(nvars_ + 1, false);
        for (const auto& cl : cnf.clauses)
            if (!add_clause(cl)) {
                trivially_unsat_ = true;
                return;
            }
    }

    SolveResult run() {
        SolveResult res;
        if (trivially_unsat_) {
            res.status = SolveStatus::Unsat;
            return res;
        }
        if (propagate() != -1) {
            res.status = SolveStatus::Unsat;
            return res;
        }
        std::uint64_t conflicts_total = 0;
        std::uint64_t restart_at = 100;
        for (;;) {
            int confl = propagate();
            if (confl != -1) {
                ++conflicts_total;
                if (limit_ && conflicts_total > limit_) {
                    res.status = SolveStatus::ResourceLimit;
                    return res;
                }
                if (decision_level() == 0) {
                    res.status = SolveStatus::Unsat;
                    return res;
                }
                std::vector<Lit> learnt;
                int back_level = analyze(confl, learnt);
                backtrack(back_level);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    int ci = learn(learnt);
                    enqueue(learnt[0], ci);
                }
                decay_activities();
                if (conflicts_total >= restart_at) {
                    restart_at += 100 + restart_at / 2;
                    backtrack(0);
                }
            } else {
                Var next = pick_branch();
                if (next == 0) {
                    res.status = SolveStatus::Sat;
                    res.model.assign(nvars_ + 1, false);
                    for (Var v = 1; v <= nvars_; ++v) res.model[v] = assign_[v] == 1;
                    return res;
                }
                trail_lim_.push_back(trail_.size());
                enqueue(phase_[next] ? static_cast<Lit>(next) : -static_cast<Lit>(next),
                        -1);
            }
        }
    }

private:
    static std::size_t widx(Lit l) {
        Var v = static_cast<Var>(std::abs(l));
        return 2 * v + (l < 0 ? 1 : 0);
    }
    int value(Lit l) const {  // 1 true, -1 false, 0 unassigned
        int a = assign_[std::abs(l)];
        if (a == 0) return 0;
        return (a == 1) == (l > 0) ? 1 : -1;
    }
    std::size_t decision_level() const { return trail_lim_.size(); }

    bool add_clause(std::vector<Lit> cl) {
        std::sort(cl.begin(), cl.end(), [](Lit a, Lit b) {
            if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
            return a < b;
        });
        cl.erase(std::unique(cl.begin(), cl.end()), cl.end());
        for (std::size_t i = 0; i + 1 < cl.size(); ++i)
            if (cl[i] == -cl[i + 1]) return true;  // tautology
        if (cl.empty()) return false;
        if (cl.size() == 1) {
            if (value(cl[0]) == -1) return false;
            if (value(cl[0]) == 0) enqueue(cl[0], -1);
            return true;
        }
        int ci = learn(cl);
        (void)ci;
        return true;
    }

    int learn(const std::vector<Lit>& cl) {
        int ci = static_cast<int>(clauses_.size());
        clauses_.push_back(cl);
        watches_[widx(cl[0])].push_back(ci);
        watches_[widx(cl[1])].push_back(ci);
        return ci;
    }

    void enqueue(Lit l, int reason) {
        Var v = static_cast<Var>(std::abs(l));
        assign_[v] = l > 0 ? 1 : 2;
        level_[v] = static_cast<int>(decision_level());
        reason_[v] = reason;
        phase_[v] = l > 0;
        trail_.push_back(l);
    }

    int propagate() {
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            auto& wl = watches_[widx(-p)];
            std::size_t keep = 0;
            for (std::size_t i = 0; i < wl.size(); ++i) {
                int ci = wl[i];
                auto& cl = clauses_[ci];
                // make sure -p is at position 1
                if (cl[0] == -p) std::swap(cl[0], cl[1]);
                if (value(cl[0]) == 1) {
                    wl[keep++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < cl.size(); ++k)
                    if (value(cl[k]) != -1) {
                        std::swap(cl[1], cl[k]);
                        watches_[widx(cl[1])].push_back(ci);
                        moved = true;
                        break;
                    }
                if (moved) continue;
                wl[keep++] = ci;
                if (value(cl[0]) == -1) {
                    // conflict: restore remaining watches
                    for (std::size_t j = i + 1; j < wl.size(); ++j) wl[keep++] = wl[j];
                    wl.resize(keep);
                    qhead_ = trail_.size();
                    return ci;
                }
                enqueue(cl[0], ci);
            }
            wl.resize(keep);
        }
        return -1;
    }

    int analyze(int confl, std::vector<Lit>& out_learnt) {
        // first-UIP conflict analysis
        out_learnt.push_back(0);  // placeholder for the asserting literal
        std::vector<bool> seen(nvars_ + 1, false);
        int counter = 0;
        Lit p = 0;
        std::size_t idx = trail_.size();
        int ci = confl;
        do {
            const auto& cl = clauses_[ci];
            for (Lit q : cl) {
                if (p != 0 && q == p) continue;
                Var v = static_cast<Var>(std::abs(q));
                if (seen[v] || level_[v] == 0) continue;
                seen[v] = true;
                bump(v);
                if (level_[v] == static_cast<int>(decision_level()))
                    ++counter;
                else
                    out_learnt.push_back(q);
            }
            while (!seen[static_cast<Var>(std::abs(trail_[--idx]))]) {}
            p = trail_[idx];
            Var pv = static_cast<Var>(std::abs(p));
            seen[pv] = false;
            ci = reason_[pv];
            --counter;
        } while (counter > 0);
        out_learnt[0] = -p;
        int back = 0;
        if (out_learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t i = 2; i < out_learnt.size(); ++i)
                if (level_[std::abs(out_learnt[i])] > level_[std::abs(out_learnt[max_i])])
                    max_i = i;
            std::swap(out_learnt[1], out_learnt[max_i]);
            back = level_[std::abs(out_learnt[1])];
        }
        if (out_learnt.size() == 1) {
            // unit learnt clause: widen to keep the two-watch invariant by
            // duplicating is not allowed, so handle at caller via level 0
            return 0;
        }
        return back;
    }

    void backtrack(int level) {
        while (decision_level() > static_cast<std::size_t>(level)) {
            std::size_t lim = trail_lim_.back();
            trail_lim_.pop_back();
            while (trail_.size() > lim) {
                Var v = static_cast<Var>(std::abs(trail_.back()));
                assign_[v] = 0;
                reason_[v] = -1;
                trail_.pop_back();
            }
        }
        if (qhead_ > trail_.size()) qhead_ = trail_.size();
    }

    Var pick_branch() {
        Var best = 0;
        double best_act = -1.0;
        for (Var v = 1; v <= nvars_; ++v)
            if (assign_[v] == 0 && activity_[v] > best_act) {
                best = v;
                best_act = activity_[v];
            }
        return best;
    }

    void bump(Var v) {
        activity_[v] += inc_;
        if (activity_[v] > 1e100) {
            for (Var u = 1; u <= nvars_; ++u) activity_[u] *= 1e-100;
            inc_ *= 1e-100;
        }
    }
    void decay_activities() { inc_ /= 0.95; }

    Var nvars_;
    std::uint64_t limit_;
    bool trivially_unsat_ = false;
    std::vector<std::vector<Lit>> clauses_;
    std::vector<std::vector<int>> watches_;
    std::vector<int> assign_;  // 0 unassigned, 1 true, 2 false
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<double> activity_;
    std::vector<bool> phase_;
    std::vector<Lit> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t qhead_ = 0;
    double inc_ = 1.0;
};

}  // namespace

SolveResult InternalSolver::solve(const CnfFormula& c) {
    Cdcl solver(c, conflict_limit_);
    return solver.run();
}

SolveResult solve(SolverOracle& oracle, const CnfFormula& c) {
    SolveResult r = oracle.solve(c);
#ifndef NDEBUG
    if (r.status == SolveStatus::Sat) assert(model_satisfies(c, r.model));
#endif
    return r;
}

bool model_satisfies(const CnfFormula& c, const std::vector<bool>& model) {
    for (const auto& cl : c.clauses) {
        bool sat = false;
        for (Lit l : cl) {
            Var v = static_cast<Var>(std::abs(l));
            if (v < model.size() && model[v] == (l > 0)) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

std::pair<std::vector<ProjectedModel>, bool> enumerate_projected_models(
    SolverOracle& oracle, const CnfFormula& c, std::size_t cap) {
    if (cap < 1) throw std::invalid_argument("cap must be >= 1");
    std::vector<ProjectedModel> out;
    CnfFormula work = c;
    for (;;) {
        SolveResult r = solve(oracle, work);
        if (r.status == SolveStatus::ResourceLimit)
            throw std::runtime_error("solver resource limit during enumeration");
        if (r.status == SolveStatus::Unsat) return {out, true};
        ProjectedModel pm;
        std::vector<Lit> blocking;
        for (Var v : work.projection_set) {
            bool val = r.model[v];
            pm.push_back(val);
            blocking.push_back(val ? -static_cast<Lit>(v) : static_cast<Lit>(v));
        }
        out.push_back(std::move(pm));
        if (out.size() >= cap) return {out, false};
        if (blocking.empty()) return {out, true};  // empty projection: one cell
        work.add_clause(std::move(blocking));
    }
}

// ---------------------------------------------------------------------------
// DIMACS and the external backend

std::string to_dimacs(const CnfFormula& c) {
    std::ostringstream out;
    if (!c.projection_set.empty()) {
        out << "c ind";
        for (Var v : c.projection_set) out << ' ' << v;
        out << " 0\n";
    }
    out << "p cnf " << c.var_count << ' ' << c.clauses.size() << '\n';
    for (const auto& cl : c.clauses) {
        for (Lit l : cl) out << l << ' ';
        out << "0\n";
    }
    return out.str();
}

SolveResult ExternalSolver::solve(const CnfFormula& c) {
    char tmpl[] = "/tmp/ci_cnf_XXXXXX";
    int fd = mkstemp(tmpl);
    if (fd < 0) throw std::runtime_error("cannot create temp file");
    {
        std::ofstream out(tmpl);
        out << to_dimacs(c);
    }
    close(fd);
    std::string cmd = exe_ + " " + tmpl + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        std::remove(tmpl);
        throw std::runtime_error("cannot run external solver: " + exe_);
    }
    std::string output;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof(buf), pipe)) output.append(buf, got);
    pclose(pipe);
    std::remove(tmpl);

    SolveResult res;
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("s SATISFIABLE", 0) == 0) {
            res.status = SolveStatus::Sat;
            res.model.assign(c.var_count + 1, false);
        } else if (line.rfind("s UNSATISFIABLE", 0) == 0) {
            res.status = SolveStatus::Unsat;
        } else if (line.rfind("v ", 0) == 0 && res.status == SolveStatus::Sat) {
            std::istringstream vs(line.substr(2));
            Lit l;
            while (vs >> l)
                if (l != 0 && static_cast<Var>(std::abs(l)) <= c.var_count)
                    res.model[std::abs(l)] = l > 0;
        }
    }
    return res;
}

std::unique_ptr<SolverOracle> make_solver(const std::string& spec) {
    if (spec.empty() || spec == "internal") return std::make_unique<InternalSolver>();
    return std::make_unique<ExternalSolver>(spec);
}

}  // namespace ci
