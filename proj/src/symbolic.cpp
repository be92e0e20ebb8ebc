#include "ci/symbolic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <sstream>
#include <utility>

namespace ci {
namespace {

using Json = nlohmann::json;

BoolFormula substitute(const BoolFormula& f, const std::vector<Var>& mapping) {
    switch (f.op) {
        case BoolFormula::Op::Const:
            return f;
        case BoolFormula::Op::Var: {
            if (f.var >= mapping.size() || mapping[f.var] == 0)
                throw PreconditionError("formula references an undeclared variable");
            return BoolFormula::make_var(mapping[f.var]);
        }
        default: {
            BoolFormula g;
            g.op = f.op;
            auto kids = std::make_shared<std::vector<BoolFormula>>();
            kids->reserve(f.children ? f.children->size() : 0);
            if (f.children)
                for (const auto& c : *f.children) kids->push_back(substitute(c, mapping));
            g.children = std::move(kids);
            return g;
        }
    }
}

std::vector<Var> block_mapping(const SymbolicAutomaton& s, const std::vector<Var>& xs,
                               const std::vector<Var>& as, const std::vector<Var>& ys) {
    std::vector<Var> mapping(1 + 2 * s.state_bits + s.input_bits, 0);
    for (std::size_t i = 0; i < s.state_bits; ++i) mapping[s.x_var(i)] = xs[i];
    for (std::size_t i = 0; i < s.input_bits && !as.empty(); ++i)
        mapping[s.a_var(i)] = as[i];
    for (std::size_t i = 0; i < s.state_bits && !ys.empty(); ++i)
        mapping[s.y_var(i)] = ys[i];
    return mapping;
}

BoolFormula inst_init(const SymbolicAutomaton& s, const std::vector<Var>& xs) {
    return substitute(s.init, block_mapping(s, xs, {}, {}));
}
BoolFormula inst_acc(const SymbolicAutomaton& s, const std::vector<Var>& xs) {
    return substitute(s.acc, block_mapping(s, xs, {}, {}));
}
BoolFormula inst_delta(const SymbolicAutomaton& s, const std::vector<Var>& xs,
                       const std::vector<Var>& as, const std::vector<Var>& ys) {
    return substitute(s.delta, block_mapping(s, xs, as, ys));
}

BoolFormula bits_equal_const(const std::vector<Var>& vars, std::uint64_t value) {
    std::vector<BoolFormula> lits;
    lits.reserve(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        BoolFormula v = BoolFormula::make_var(vars[i]);
        lits.push_back((value >> i) & 1 ? v : BoolFormula::negate(v));
    }
    return BoolFormula::conj(std::move(lits));
}

BoolFormula blocks_equal(const std::vector<Var>& a, const std::vector<Var>& b) {
    std::vector<BoolFormula> eqs;
    eqs.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        eqs.push_back(BoolFormula::iff(BoolFormula::make_var(a[i]),
                                       BoolFormula::make_var(b[i])));
    return BoolFormula::conj(std::move(eqs));
}

BoolFormula all_zero(const std::vector<Var>& vars) {
    std::vector<BoolFormula> lits;
    lits.reserve(vars.size());
    for (Var v : vars) lits.push_back(BoolFormula::negate(BoolFormula::make_var(v)));
    return BoolFormula::conj(std::move(lits));
}

/// The input block carries one of the declared symbol patterns.
BoolFormula valid_input(const SymbolicAutomaton& s, const std::vector<Var>& as) {
    if (s.decode_covers_all()) return BoolFormula::constant(true);
    std::vector<BoolFormula> options;
    options.reserve(s.symbol_decode.size());
    for (const auto& [pattern, sym] : s.symbol_decode)
        options.push_back(bits_equal_const(as, pattern));
    return BoolFormula::disj(std::move(options));
}

BoolFormula exactly_one(const std::vector<Var>& vars) {
    std::vector<BoolFormula> parts;
    std::vector<BoolFormula> any;
    for (Var v : vars) any.push_back(BoolFormula::make_var(v));
    parts.push_back(BoolFormula::disj(std::move(any)));
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            parts.push_back(BoolFormula::disj(
                {BoolFormula::negate(BoolFormula::make_var(vars[i])),
                 BoolFormula::negate(BoolFormula::make_var(vars[j]))}));
    return BoolFormula::conj(std::move(parts));
}

class VarAlloc {
public:
    Var one() { return ++next_; }
    std::vector<Var> block(std::size_t k) {
        std::vector<Var> vs(k);
        for (auto& v : vs) v = ++next_;
        return vs;
    }
    Var count() const { return next_; }

private:
    Var next_ = 0;
};

Symbol decode_symbol(const SymbolicAutomaton& s, std::uint64_t pattern) {
    auto it = s.symbol_decode.find(pattern);
    if (it == s.symbol_decode.end())
        throw PreconditionError("model contains an input pattern outside symbol_decode");
    return it->second;
}

std::uint64_t read_bits(const std::vector<Var>& block, const std::vector<bool>& model) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < block.size(); ++i)
        if (model[block[i]]) value |= std::uint64_t{1} << i;
    return value;
}

std::optional<std::uint64_t> encode_symbol(const SymbolicAutomaton& s, Symbol sym) {
    for (const auto& [pattern, decoded] : s.symbol_decode)
        if (decoded == sym) return pattern;
    return std::nullopt;
}

/// One stutter-padded path segment: selectors pick a length ℓ, steps below ℓ
/// take real transitions, steps at or above ℓ copy the state and zero the
/// input block.
struct Segment {
    std::vector<std::vector<Var>> states;  // steps+1 blocks
    std::vector<std::vector<Var>> inputs;  // steps blocks
    std::vector<Var> selectors;            // lengths min_len..steps
    std::size_t min_len = 0;
};

Segment alloc_segment(VarAlloc& alloc, const SymbolicAutomaton& s, std::size_t steps,
                      std::size_t min_len, std::vector<Var> start_states) {
    Segment seg;
    seg.min_len = min_len;
    seg.states.push_back(start_states.empty() ? alloc.block(s.state_bits)
                                              : std::move(start_states));
    for (std::size_t i = 0; i < steps; ++i) {
        seg.inputs.push_back(alloc.block(s.input_bits));
        seg.states.push_back(alloc.block(s.state_bits));
    }
    seg.selectors = alloc.block(steps - min_len + 1);
    return seg;
}

void segment_constraints(const SymbolicAutomaton& s, const Segment& seg,
                         std::vector<BoolFormula>& out) {
    out.push_back(exactly_one(seg.selectors));
    std::size_t steps = seg.inputs.size();
    for (std::size_t i = 0; i < steps; ++i) {
        // Step i is taken iff the selected length exceeds i.
        std::vector<BoolFormula> longer;
        for (std::size_t len = std::max(seg.min_len, i + 1); len <= steps; ++len)
            longer.push_back(BoolFormula::make_var(seg.selectors[len - seg.min_len]));
        BoolFormula active = BoolFormula::disj(std::move(longer));
        BoolFormula move = BoolFormula::conj(
            {inst_delta(s, seg.states[i], seg.inputs[i], seg.states[i + 1]),
             valid_input(s, seg.inputs[i])});
        BoolFormula stay = BoolFormula::conj(
            {all_zero(seg.inputs[i]), blocks_equal(seg.states[i], seg.states[i + 1])});
        out.push_back(BoolFormula::disj({BoolFormula::conj({active, std::move(move)}),
                                         BoolFormula::conj({BoolFormula::negate(active),
                                                            std::move(stay)})}));
    }
}

std::size_t segment_length(const Segment& seg, const std::vector<bool>& model) {
    for (std::size_t k = 0; k < seg.selectors.size(); ++k)
        if (model[seg.selectors[k]]) return seg.min_len + k;
    throw PreconditionError("no length selector set in model");
}

Word segment_word(const SymbolicAutomaton& s, const Segment& seg,
                  const std::vector<bool>& model) {
    Word w;
    std::size_t len = segment_length(seg, model);
    for (std::size_t i = 0; i < len; ++i)
        w.push_back(decode_symbol(s, read_bits(seg.inputs[i], model)));
    return w;
}

struct LassoQuery {
    CnfFormula cnf;
    Segment x, y, z;
};

/// Accepting lasso: x reaches a state, y loops on it (|y| ≥ 1), z reaches
/// acceptance.  Satisfiable ⇔ the language is infinite; the segment bound
/// is widened beyond D to the state-space size when that is small, because
/// the longest-simple-accepting-path diameter can undershoot cycle lengths
/// (e.g. a cycle through the initial state with no other accepting path).
LassoQuery build_lasso_query(const SymbolicAutomaton& s, std::size_t D) {
    std::size_t bound = std::max<std::size_t>(D, 1);
    if (s.state_bits < 16)
        bound = std::max(bound,
                         std::min<std::size_t>(std::size_t{1} << s.state_bits, 64));
    VarAlloc alloc;
    LassoQuery q;
    q.x = alloc_segment(alloc, s, bound, 0, {});
    q.y = alloc_segment(alloc, s, bound, 1, q.x.states.back());
    q.z = alloc_segment(alloc, s, bound, 0, q.y.states.back());
    std::vector<BoolFormula> parts;
    parts.push_back(inst_init(s, q.x.states.front()));
    segment_constraints(s, q.x, parts);
    segment_constraints(s, q.y, parts);
    segment_constraints(s, q.z, parts);
    parts.push_back(blocks_equal(q.y.states.front(), q.y.states.back()));
    parts.push_back(inst_acc(s, q.z.states.back()));
    q.cnf = to_cnf(BoolFormula::conj(std::move(parts)), {});
    return q;
}

Rat rat_from_count(const ApproxCountResult& c) { return Rat(c.estimate); }

}  // namespace

std::size_t counting_pivot(const Rat& tau) {
    double t = tau.convert_to<double>();
    double v = std::exp(2.0) * (1.0 + 1.0 / t) * (1.0 + 1.0 / t);
    return static_cast<std::size_t>(std::ceil(v));
}

std::size_t counting_repetitions(double delta) {
    return static_cast<std::size_t>(std::ceil(35.0 * std::log(3.0 / delta)));
}

SymbolicAutomaton encode_dfa(const Dfa& d) {
    d.validate();
    SymbolicAutomaton s;
    auto bits_for = [](std::size_t count) {
        std::size_t b = 1;
        while ((std::size_t{1} << b) < count) ++b;
        return b;
    };
    s.state_bits = bits_for(d.state_count);
    s.input_bits = bits_for(std::max<std::size_t>(d.alphabet.size(), 1));
    s.alphabet = d.alphabet;
    for (Symbol a = 0; a < d.alphabet.size(); ++a)
        s.symbol_decode.emplace(static_cast<std::uint64_t>(a), a);

    std::vector<Var> xs, as, ys;
    for (std::size_t i = 0; i < s.state_bits; ++i) xs.push_back(s.x_var(i));
    for (std::size_t i = 0; i < s.input_bits; ++i) as.push_back(s.a_var(i));
    for (std::size_t i = 0; i < s.state_bits; ++i) ys.push_back(s.y_var(i));

    s.init = bits_equal_const(xs, d.initial);
    std::vector<BoolFormula> acc;
    for (State f : d.accepting) acc.push_back(bits_equal_const(xs, f));
    s.acc = acc.empty() ? BoolFormula::constant(false)
                        : BoolFormula::disj(std::move(acc));
    std::vector<BoolFormula> moves;
    for (const auto& [key, to] : d.delta)
        moves.push_back(BoolFormula::conj({bits_equal_const(xs, key.first),
                                           bits_equal_const(as, key.second),
                                           bits_equal_const(ys, to)}));
    s.delta = moves.empty() ? BoolFormula::constant(false)
                            : BoolFormula::disj(std::move(moves));
    return s;
}

static void check_compatible(const SymbolicAutomaton& a, const SymbolicAutomaton& b) {
    if (a.input_bits != b.input_bits || a.symbol_decode != b.symbol_decode ||
        !(a.alphabet == b.alphabet))
        throw PreconditionError("symbolic automata use different input encodings");
}

static SymbolicAutomaton product_impl(const SymbolicAutomaton& a,
                                      const SymbolicAutomaton& b, bool negate_b_acc) {
    check_compatible(a, b);
    SymbolicAutomaton p;
    p.state_bits = a.state_bits + b.state_bits;
    p.input_bits = a.input_bits;
    p.alphabet = a.alphabet;
    p.symbol_decode = a.symbol_decode;

    auto remap = [&](const SymbolicAutomaton& src, std::size_t offset) {
        std::vector<Var> m(1 + 2 * src.state_bits + src.input_bits, 0);
        for (std::size_t i = 0; i < src.state_bits; ++i) {
            m[src.x_var(i)] = p.x_var(offset + i);
            m[src.y_var(i)] = p.y_var(offset + i);
        }
        for (std::size_t i = 0; i < src.input_bits; ++i) m[src.a_var(i)] = p.a_var(i);
        return m;
    };
    auto ma = remap(a, 0);
    auto mb = remap(b, a.state_bits);
    p.init = BoolFormula::conj({substitute(a.init, ma), substitute(b.init, mb)});
    BoolFormula bacc = substitute(b.acc, mb);
    if (negate_b_acc) bacc = BoolFormula::negate(std::move(bacc));
    p.acc = BoolFormula::conj({substitute(a.acc, ma), std::move(bacc)});
    p.delta = BoolFormula::conj({substitute(a.delta, ma), substitute(b.delta, mb)});
    return p;
}

SymbolicAutomaton symbolic_product(const SymbolicAutomaton& a, const SymbolicAutomaton& b) {
    return product_impl(a, b, false);
}

SymbolicAutomaton symbolic_product_negated(const SymbolicAutomaton& a,
                                           const SymbolicAutomaton& b) {
    return product_impl(a, b, true);
}

bool symbolic_is_nondeterministic(const SymbolicAutomaton& s, SolverOracle& oracle) {
    {
        VarAlloc alloc;
        auto xs = alloc.block(s.state_bits);
        auto as = alloc.block(s.input_bits);
        auto y1 = alloc.block(s.state_bits);
        auto y2 = alloc.block(s.state_bits);
        BoolFormula f = BoolFormula::conj(
            {inst_delta(s, xs, as, y1), inst_delta(s, xs, as, y2), valid_input(s, as),
             BoolFormula::negate(blocks_equal(y1, y2))});
        if (solve(oracle, to_cnf(f, {})).status == SolveStatus::Sat) return true;
    }
    VarAlloc alloc;
    auto x1 = alloc.block(s.state_bits);
    auto x2 = alloc.block(s.state_bits);
    BoolFormula f = BoolFormula::conj({inst_init(s, x1), inst_init(s, x2),
                                       BoolFormula::negate(blocks_equal(x1, x2))});
    return solve(oracle, to_cnf(f, {})).status == SolveStatus::Sat;
}

UnrolledFormula unroll(const SymbolicAutomaton& s, std::size_t n) {
    UnrolledFormula u;
    u.steps = n;
    VarAlloc alloc;
    for (std::size_t i = 0; i < n; ++i) u.input_blocks.push_back(alloc.block(s.input_bits));
    u.length_selectors = alloc.block(n + 1);
    for (std::size_t i = 0; i <= n; ++i) u.state_blocks.push_back(alloc.block(s.state_bits));

    std::vector<BoolFormula> parts;
    parts.push_back(inst_init(s, u.state_blocks[0]));
    parts.push_back(exactly_one(u.length_selectors));
    for (std::size_t len = 0; len <= n; ++len)
        parts.push_back(BoolFormula::implies(
            BoolFormula::make_var(u.length_selectors[len]),
            inst_acc(s, u.state_blocks[len])));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<BoolFormula> longer;
        for (std::size_t len = i + 1; len <= n; ++len)
            longer.push_back(BoolFormula::make_var(u.length_selectors[len]));
        BoolFormula active = BoolFormula::disj(std::move(longer));
        parts.push_back(BoolFormula::implies(
            active,
            BoolFormula::conj({inst_delta(s, u.state_blocks[i], u.input_blocks[i],
                                          u.state_blocks[i + 1]),
                               valid_input(s, u.input_blocks[i])})));
        // Canonical padding: inputs at unused steps are forced to zero so
        // each word has exactly one projected model.
        parts.push_back(BoolFormula::implies(BoolFormula::negate(active),
                                             all_zero(u.input_blocks[i])));
    }

    std::vector<Var> projection;
    for (const auto& blk : u.input_blocks)
        projection.insert(projection.end(), blk.begin(), blk.end());
    projection.insert(projection.end(), u.length_selectors.begin(),
                      u.length_selectors.end());
    u.cnf = to_cnf(BoolFormula::conj(std::move(parts)), std::move(projection));
    return u;
}

Word decode_projected_model(const SymbolicAutomaton& s, const UnrolledFormula& u,
                            const ProjectedModel& model) {
    if (model.size() != u.cnf.projection_set.size())
        throw PreconditionError("projected model size mismatch");
    std::size_t sel_base = u.steps * s.input_bits;
    std::size_t len = u.steps + 1;
    for (std::size_t k = 0; k <= u.steps; ++k)
        if (model[sel_base + k]) {
            len = k;
            break;
        }
    if (len > u.steps) throw PreconditionError("no length selector set in model");
    Word w;
    for (std::size_t i = 0; i < len; ++i) {
        std::uint64_t pattern = 0;
        for (std::size_t b = 0; b < s.input_bits; ++b)
            if (model[i * s.input_bits + b]) pattern |= std::uint64_t{1} << b;
        w.push_back(decode_symbol(s, pattern));
    }
    return w;
}

bool symbolic_accepts(const SymbolicAutomaton& s, const Word& w, SolverOracle& oracle) {
    VarAlloc alloc;
    std::vector<BoolFormula> parts;
    auto prev = alloc.block(s.state_bits);
    parts.push_back(inst_init(s, prev));
    for (Symbol sym : w) {
        auto pattern = encode_symbol(s, sym);
        if (!pattern) return false;
        auto in = alloc.block(s.input_bits);
        auto next = alloc.block(s.state_bits);
        parts.push_back(bits_equal_const(in, *pattern));
        parts.push_back(inst_delta(s, prev, in, next));
        prev = next;
    }
    parts.push_back(inst_acc(s, prev));
    return solve(oracle, to_cnf(BoolFormula::conj(std::move(parts)), {})).status ==
           SolveStatus::Sat;
}

DiameterResult diameter(const SymbolicAutomaton& s, SolverOracle& oracle,
                        std::size_t cap) {
    if (cap < 1) throw PreconditionError("diameter cap must be at least 1");
    // A path query of exactly n transitions with pairwise-distinct state
    // vectors; with `accepting` it witnesses the diameter, without it it
    // tells us whether any longer simple path can still exist.
    auto query = [&](std::size_t n, bool accepting) {
        VarAlloc alloc;
        std::vector<std::vector<Var>> states;
        std::vector<BoolFormula> parts;
        states.push_back(alloc.block(s.state_bits));
        parts.push_back(inst_init(s, states[0]));
        for (std::size_t i = 0; i < n; ++i) {
            auto in = alloc.block(s.input_bits);
            states.push_back(alloc.block(s.state_bits));
            parts.push_back(inst_delta(s, states[i], in, states[i + 1]));
            parts.push_back(valid_input(s, in));
        }
        if (accepting) parts.push_back(inst_acc(s, states[n]));
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j)
                parts.push_back(BoolFormula::negate(blocks_equal(states[i], states[j])));
        return solve(oracle, to_cnf(BoolFormula::conj(std::move(parts)), {})).status ==
               SolveStatus::Sat;
    };

    std::size_t best = 0;
    for (std::size_t n = 1;; ++n) {
        if (!query(n, false)) break;  // simple paths are prefix-closed
        if (n > cap)
            throw ResourceError("diameter search exceeded its cap of " +
                                std::to_string(cap));
        if (query(n, true)) best = n;
    }
    return {best, DiameterResult::Method::ExhaustedSearch};
}

bool symbolic_is_infinite(const SymbolicAutomaton& s, SolverOracle& oracle,
                          std::size_t D) {
    LassoQuery q = build_lasso_query(s, D);
    return solve(oracle, q.cnf).status == SolveStatus::Sat;
}

PumpWitness symbolic_pump_witness(const SymbolicAutomaton& s, SolverOracle& oracle,
                                  std::size_t D) {
    LassoQuery q = build_lasso_query(s, D);
    SolveResult r = solve(oracle, q.cnf);
    if (r.status != SolveStatus::Sat)
        throw PreconditionError("pump witness requested for a finite language");
    PumpWitness w;
    w.x = segment_word(s, q.x, r.model);
    w.y = segment_word(s, q.y, r.model);
    w.z = segment_word(s, q.z, r.model);
    return w;
}

ApproxCountResult approx_count(const SymbolicAutomaton& s, SolverOracle& oracle,
                               const Rat& tau, double delta, std::size_t D,
                               RandomBits& rng) {
    if (tau <= 0) throw PreconditionError("tolerance must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw PreconditionError("confidence parameter must lie in (0,1)");
    if (symbolic_is_infinite(s, oracle, D)) return {true, 0, false};

    UnrolledFormula u = unroll(s, D);
    std::size_t pivot = counting_pivot(tau);
    auto [base, complete] = enumerate_projected_models(oracle, u.cnf, pivot + 1);
    if (complete) return {false, Int(base.size()), true};

    std::size_t reps = counting_repetitions(delta);
    std::vector<Int> estimates;
    // Cell sizes shrink monotonically as constraints accumulate, and the
    // boundary level concentrates across repetitions, so each repetition
    // resumes one level below the last boundary instead of rescanning from 1.
    std::size_t start_m = 1;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        CnfFormula hashed = u.cnf;
        Int est = 0;
        std::vector<XorConstraint> prefix;
        for (std::size_t m = 0; m + 1 < start_m; ++m)
            prefix.push_back(random_xor(u.cnf.projection_set, rng));
        if (!prefix.empty()) hashed = add_xor_constraints(hashed, prefix);
        for (std::size_t m = start_m; m <= u.cnf.projection_set.size(); ++m) {
            hashed = add_xor_constraints(hashed,
                                         {random_xor(u.cnf.projection_set, rng)});
            auto [cell, cell_complete] = enumerate_projected_models(oracle, hashed,
                                                                    pivot + 1);
            if (cell_complete) {
                if (!cell.empty()) est = Int(cell.size()) << m;
                start_m = (m > 1) ? m - 1 : 1;
                break;
            }
        }
        estimates.push_back(est);
    }
    std::sort(estimates.begin(), estimates.end());
    return {false, estimates[estimates.size() / 2], false};
}

namespace {

class HashCellSampler final : public Sampler {
public:
    HashCellSampler(SymbolicAutomaton s, UnrolledFormula u,
                    std::shared_ptr<SolverOracle> oracle, Int pilot, std::size_t pivot)
        : s_(std::move(s)),
          u_(std::move(u)),
          oracle_(std::move(oracle)),
          pilot_(std::move(pilot)),
          pivot_(pivot) {
        while ((pilot_ >> static_cast<unsigned>(xor_count_)) > pivot_) ++xor_count_;
    }

    Word draw(RandomBits& rng) const override {
        for (int attempt = 0; attempt < 64; ++attempt) {
            CnfFormula hashed = u_.cnf;
            std::vector<XorConstraint> xors;
            for (std::size_t m = 0; m < xor_count_; ++m)
                xors.push_back(random_xor(u_.cnf.projection_set, rng));
            if (!xors.empty()) hashed = add_xor_constraints(hashed, xors);
            auto [cell, complete] = enumerate_projected_models(*oracle_, hashed,
                                                               2 * pivot_ + 1);
            if (!complete || cell.empty()) continue;  // bad cell: redraw the hash
            std::size_t k = static_cast<std::size_t>(rng.below(cell.size()));
            return decode_projected_model(s_, u_, cell[k]);
        }
        throw ResourceError("hash-cell sampling failed to find a usable cell");
    }

    CountValue support_size() const override { return CountValue::finite(pilot_); }
    Rat exact_prob(const Word&) const override { return 0; }
    bool exact_metadata() const override { return false; }
    std::vector<Word> support() const override {
        throw ResourceError("hash-cell sampler support is not materialized");
    }
    SamplerKind kind() const override { return SamplerKind::HashCell; }

private:
    SymbolicAutomaton s_;
    UnrolledFormula u_;
    std::shared_ptr<SolverOracle> oracle_;
    Int pilot_;
    std::size_t pivot_;
    std::size_t xor_count_ = 0;
};

}  // namespace

SamplerPtr almost_uniform_sampler(const SymbolicAutomaton& s,
                                  std::shared_ptr<SolverOracle> oracle, const Rat& tau,
                                  std::size_t D, RandomBits& rng) {
    ApproxCountResult pilot = approx_count(s, *oracle, tau, 0.1, D, rng);
    if (pilot.is_infinite)
        throw PreconditionError("almost-uniform sampling needs a finite language");
    if (pilot.estimate == 0)
        throw PreconditionError("almost-uniform sampling needs a non-empty language");

    UnrolledFormula u = unroll(s, D);
    if (pilot.exact) {
        // The whole language fit under the pivot: enumerate it and be
        // exactly uniform.
        std::size_t cap = static_cast<std::size_t>(pilot.estimate) + 1;
        auto [models, complete] = enumerate_projected_models(*oracle, u.cnf, cap);
        if (!complete) throw ResourceError("exact enumeration diverged from pilot count");
        std::vector<Word> words;
        words.reserve(models.size());
        for (const auto& m : models) words.push_back(decode_projected_model(s, u, m));
        return finite_support_sampler(std::move(words));
    }
    return std::make_shared<HashCellSampler>(s, std::move(u), std::move(oracle),
                                             pilot.estimate, counting_pivot(tau));
}

SamplerPtr symbolic_pump_sampler(const SymbolicAutomaton& s, SolverOracle& oracle,
                                 const Int& n, std::size_t D) {
    return pump_sampler(symbolic_pump_witness(s, oracle, D), n);
}

SynthesisResult synthesize_symbolic(const SymbolicAutomaton& improv,
                                    const SymbolicAutomaton& admiss, const Rat& epsilon,
                                    const Rat& rho, const SymbolicConfig& config,
                                    std::shared_ptr<SolverOracle> oracle,
                                    RandomBits& rng) {
    validate_parameters(epsilon, rho);
    check_compatible(improv, admiss);
    if (config.tau <= 0) throw PreconditionError("tolerance must be positive");
    if (!(config.delta > 0.0 && config.delta < 1.0))
        throw PreconditionError("confidence parameter must lie in (0,1)");
    if (config.tau < Rat(171, 25))
        std::cerr << "warning: tolerance " << config.tau
                  << " is below 6.84; the sampling uniformity guarantee degrades\n";

    SymbolicAutomaton A = symbolic_product(improv, admiss);
    auto bound_for = [&](const SymbolicAutomaton& s) -> std::size_t {
        if (config.diameter_bound) return *config.diameter_bound;
        return diameter(s, *oracle, config.diameter_cap).diameter;
    };
    std::size_t D_I = bound_for(improv);
    std::size_t D_A = bound_for(A);

    // Two estimates at confidence (1-δ)^(1/2) each give joint confidence 1-δ.
    double delta_each = 1.0 - std::sqrt(1.0 - config.delta);
    ApproxCountResult cI = approx_count(improv, *oracle, config.tau, delta_each, D_I, rng);
    ApproxCountResult cA = approx_count(A, *oracle, config.tau, delta_each, D_A, rng);

    SynthesisResult result;
    result.verdict = feasibility(cI.as_count(), cA.as_count(), epsilon, rho);
    if (!result.verdict->feasible) {
        result.status = SynthesisStatus::Infeasible;
        return result;
    }

    Rat blowup = (1 + config.tau) * (1 + config.tau);
    Improviser imp;
    imp.certified_epsilon = 0;
    imp.admissible_mass = 1;
    imp.admissible_mass_exact = true;

    if (cA.is_infinite) {
        imp.case_tag = "symbolic-A";
        imp.certified_rho = rho;
        imp.components.push_back(
            {1, symbolic_pump_sampler(A, *oracle, ceil_rat(1 / rho), D_A)});
    } else if (rat_from_count(cA) >= 1 / rho) {
        imp.case_tag = "symbolic-B";
        imp.certified_rho = blowup * rho;
        imp.components.push_back(
            {1, almost_uniform_sampler(A, oracle, config.tau, D_A, rng)});
    } else if (cI.is_infinite) {
        if (symbolic_is_nondeterministic(admiss, *oracle)) {
            result.status = SynthesisStatus::NotApplicable;
            result.detail =
                "the admissibility automaton is nondeterministic, so its "
                "acceptance cannot be soundly negated for the complement mixture";
            return result;
        }
        SymbolicAutomaton B = symbolic_product_negated(improv, admiss);
        std::size_t D_B = bound_for(B);
        Rat e_a = rat_from_count(cA);
        Int M = ceil_rat((1 / rho - e_a) / (1 + config.tau));
        if (M < 1) M = 1;
        imp.case_tag = "symbolic-C";
        imp.certified_epsilon = epsilon;
        imp.certified_rho = blowup * rho;
        Rat w_a = rho * e_a;
        if (w_a > 0)
            imp.components.push_back(
                {w_a, almost_uniform_sampler(A, oracle, config.tau, D_A, rng)});
        imp.components.push_back(
            {1 - w_a, symbolic_pump_sampler(B, *oracle, M, D_B)});
        // The pump component draws from I \ A, so the admissible mass is
        // exactly the A-component weight.
        imp.admissible_mass = w_a;
    } else {
        imp.case_tag = "symbolic-D";
        imp.certified_epsilon = epsilon;
        imp.certified_rho = blowup * (1 + epsilon) * rho;
        imp.components.push_back(
            {1 - epsilon, almost_uniform_sampler(A, oracle, config.tau, D_A, rng)});
        if (epsilon > 0)
            imp.components.push_back(
                {epsilon, almost_uniform_sampler(improv, oracle, config.tau, D_I, rng)});
        bool exact = cA.exact && cI.exact;
        for (const auto& c : imp.components) exact = exact && c.sampler->exact_metadata();
        if (exact && cI.estimate > 0) {
            // Both components are exactly uniform: the A draw is always
            // admissible, the I draw is admissible with probability |A|/|I|.
            imp.admissible_mass =
                (1 - epsilon) + epsilon * rat_from_count(cA) / rat_from_count(cI);
        } else {
            imp.admissible_mass = 1 - epsilon;
            imp.admissible_mass_exact = false;
        }
    }

    imp.exact_metadata = true;
    for (const auto& c : imp.components)
        imp.exact_metadata = imp.exact_metadata && c.sampler->exact_metadata();
    result.status = SynthesisStatus::Ok;
    result.improviser = std::move(imp);
    return result;
}

namespace {

struct Tokenizer {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    explicit Tokenizer(const std::string& text) {
        std::string cur;
        for (char c : text) {
            if (c == '(' || c == ')') {
                if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
                tokens.push_back(std::string(1, c));
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
    }

    const std::string& peek() const {
        if (pos >= tokens.size()) throw ConfigError("unexpected end of formula");
        return tokens[pos];
    }
    std::string next() {
        if (pos >= tokens.size()) throw ConfigError("unexpected end of formula");
        return tokens[pos++];
    }
    bool done() const { return pos >= tokens.size(); }
};

Var parse_variable(const std::string& tok, const SymbolicAutomaton& ctx,
                   bool allow_inputs, bool allow_next) {
    if (tok.size() < 2) throw ConfigError("unknown token in formula: " + tok);
    char kind = tok[0];
    std::size_t idx = 0;
    for (std::size_t i = 1; i < tok.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(tok[i])))
            throw ConfigError("unknown token in formula: " + tok);
        idx = idx * 10 + static_cast<std::size_t>(tok[i] - '0');
    }
    switch (kind) {
        case 'x':
            if (idx >= ctx.state_bits)
                throw ConfigError("state bit out of range: " + tok);
            return ctx.x_var(idx);
        case 'a':
            if (!allow_inputs)
                throw ConfigError("input bits are not allowed here: " + tok);
            if (idx >= ctx.input_bits)
                throw ConfigError("input bit out of range: " + tok);
            return ctx.a_var(idx);
        case 'y':
            if (!allow_next)
                throw ConfigError("next-state bits are not allowed here: " + tok);
            if (idx >= ctx.state_bits)
                throw ConfigError("next-state bit out of range: " + tok);
            return ctx.y_var(idx);
        default:
            throw ConfigError("unknown token in formula: " + tok);
    }
}

BoolFormula parse_expr(Tokenizer& tz, const SymbolicAutomaton& ctx, bool allow_inputs,
                       bool allow_next) {
    std::string tok = tz.next();
    if (tok == "true") return BoolFormula::constant(true);
    if (tok == "false") return BoolFormula::constant(false);
    if (tok != "(")
        return BoolFormula::make_var(parse_variable(tok, ctx, allow_inputs, allow_next));

    std::string op = tz.next();
    std::vector<BoolFormula> args;
    while (tz.peek() != ")") args.push_back(parse_expr(tz, ctx, allow_inputs, allow_next));
    tz.next();  // consume ")"
    if (args.empty()) throw ConfigError("operator '" + op + "' needs arguments");
    if (op == "not") {
        if (args.size() != 1) throw ConfigError("'not' takes exactly one argument");
        return BoolFormula::negate(std::move(args[0]));
    }
    if (op == "and") return BoolFormula::conj(std::move(args));
    if (op == "or") return BoolFormula::disj(std::move(args));
    if (op == "xor") return BoolFormula::exclusive(std::move(args));
    throw ConfigError("unknown operator in formula: " + op);
}

void write_formula(const BoolFormula& f, const SymbolicAutomaton& ctx,
                   std::ostream& out) {
    switch (f.op) {
        case BoolFormula::Op::Const:
            out << (f.value ? "true" : "false");
            return;
        case BoolFormula::Op::Var: {
            Var v = f.var;
            if (v >= ctx.y_var(0))
                out << 'y' << (v - ctx.y_var(0));
            else if (v >= ctx.a_var(0))
                out << 'a' << (v - ctx.a_var(0));
            else
                out << 'x' << (v - ctx.x_var(0));
            return;
        }
        case BoolFormula::Op::Not:
            out << "(not ";
            write_formula(f.children->at(0), ctx, out);
            out << ')';
            return;
        case BoolFormula::Op::Implies: {
            out << "(or (not ";
            write_formula(f.children->at(0), ctx, out);
            out << ") ";
            write_formula(f.children->at(1), ctx, out);
            out << ')';
            return;
        }
        case BoolFormula::Op::Iff: {
            out << "(not (xor ";
            write_formula(f.children->at(0), ctx, out);
            out << ' ';
            write_formula(f.children->at(1), ctx, out);
            out << "))";
            return;
        }
        default: {
            const char* name = f.op == BoolFormula::Op::And   ? "and"
                               : f.op == BoolFormula::Op::Or  ? "or"
                                                              : "xor";
            out << '(' << name;
            for (const auto& c : *f.children) {
                out << ' ';
                write_formula(c, ctx, out);
            }
            out << ')';
            return;
        }
    }
}

}  // namespace

BoolFormula parse_prefix_formula(const std::string& text, const SymbolicAutomaton& ctx,
                                 bool allow_inputs, bool allow_next) {
    Tokenizer tz(text);
    BoolFormula f = parse_expr(tz, ctx, allow_inputs, allow_next);
    if (!tz.done()) throw ConfigError("trailing tokens after formula");
    return f;
}

SymbolicAutomaton parse_symbolic_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("symbolic automaton must be a JSON object");
    static const std::set<std::string> known = {"state_bits", "input_bits", "init",
                                               "acc",        "delta",      "symbol_decode"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown field in symbolic automaton: " + key);
    for (const auto& key : known)
        if (!j.contains(key))
            throw ConfigError("symbolic automaton is missing field: " + key);

    SymbolicAutomaton s;
    if (!j["state_bits"].is_number_unsigned() || j["state_bits"] == 0 ||
        j["state_bits"] > 62)
        throw ConfigError("state_bits must be an integer in [1, 62]");
    if (!j["input_bits"].is_number_unsigned() || j["input_bits"] == 0 ||
        j["input_bits"] > 62)
        throw ConfigError("input_bits must be an integer in [1, 62]");
    s.state_bits = j["state_bits"].get<std::size_t>();
    s.input_bits = j["input_bits"].get<std::size_t>();

    if (!j["symbol_decode"].is_array() || j["symbol_decode"].empty())
        throw ConfigError("symbol_decode must be a non-empty array");
    std::vector<std::string> labels;
    for (const auto& entry : j["symbol_decode"]) {
        if (!entry.is_object() || !entry.contains("bits") || !entry.contains("symbol") ||
            entry.size() != 2)
            throw ConfigError("symbol_decode entries must be {bits, symbol}");
        std::string bits = entry["bits"].get<std::string>();
        std::string label = entry["symbol"].get<std::string>();
        if (bits.size() != s.input_bits)
            throw ConfigError("bit pattern length must equal input_bits: " + bits);
        std::uint64_t pattern = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] != '0' && bits[i] != '1')
                throw ConfigError("bit pattern must be binary: " + bits);
            if (bits[i] == '1') pattern |= std::uint64_t{1} << i;
        }
        if (s.symbol_decode.count(pattern))
            throw ConfigError("duplicate bit pattern in symbol_decode: " + bits);
        if (std::find(labels.begin(), labels.end(), label) != labels.end())
            throw ConfigError("duplicate symbol label in symbol_decode: " + label);
        s.symbol_decode.emplace(pattern, static_cast<Symbol>(labels.size()));
        labels.push_back(label);
    }
    s.alphabet = Alphabet(std::move(labels));

    auto formula = [&](const char* key, bool inputs, bool next) {
        if (!j[key].is_string())
            throw ConfigError(std::string(key) + " must be a formula string");
        return parse_prefix_formula(j[key].get<std::string>(), s, inputs, next);
    };
    s.init = formula("init", false, false);
    s.acc = formula("acc", false, false);
    s.delta = formula("delta", true, true);
    return s;
}

std::string symbolic_to_json(const SymbolicAutomaton& s) {
    Json j;
    j["state_bits"] = s.state_bits;
    j["input_bits"] = s.input_bits;
    auto render = [&](const BoolFormula& f) {
        std::ostringstream out;
        write_formula(f, s, out);
        return out.str();
    };
    j["init"] = render(s.init);
    j["acc"] = render(s.acc);
    j["delta"] = render(s.delta);
    Json decode = Json::array();
    for (const auto& [pattern, sym] : s.symbol_decode) {
        std::string bits(s.input_bits, '0');
        for (std::size_t i = 0; i < s.input_bits; ++i)
            if ((pattern >> i) & 1) bits[i] = '1';
        decode.push_back({{"bits", bits}, {"symbol", s.alphabet.label(sym)}});
    }
    j["symbol_decode"] = std::move(decode);
    return j.dump(2);
}

}  // namespace ci
