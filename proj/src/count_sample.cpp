#include "ci/count_sample.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <queue>

namespace ci {

namespace {

bool word_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

std::vector<std::pair<State, std::size_t>> topo_order_reverse(
    const Dfa& d) {
    // Kahn on the trimmed DAG; returns states in reverse topological order
    // (every state after all its successors).
    std::vector<std::size_t> outdeg(d.state_count, 0);
    std::vector<std::vector<State>> rev(d.state_count);
    for (const auto& [key, to] : d.delta) {
        ++outdeg[key.first];
        rev[to].push_back(key.first);
    }
    std::vector<std::pair<State, std::size_t>> order;
    std::deque<State> ready;
    for (State s = 0; s < d.state_count; ++s)
        if (outdeg[s] == 0) ready.push_back(s);
    while (!ready.empty()) {
        State s = ready.front();
        ready.pop_front();
        order.push_back({s, order.size()});
        for (State p : rev[s])
            if (--outdeg[p] == 0) ready.push_back(p);
    }
    if (order.size() != d.state_count)
        throw PreconditionError("path counts require an acyclic (finite-language) automaton");
    return order;
}

}  // namespace

PathCountTable path_counts(const Dfa& a) {
    auto [t, rep] = trim(a);
    PathCountTable table;
    table.trimmed = t;
    if (rep.kept_states.empty()) {
        table.language_empty = true;
        return table;
    }
    auto order = topo_order_reverse(t);
    table.counts.assign(t.state_count, 0);
    for (auto [s, _] : order) {
        Int p = t.accepting.count(s) ? 1 : 0;
        for (Symbol sym = 0; sym < t.alphabet.size(); ++sym)
            if (auto u = t.step(s, sym)) p += table.counts[*u];
        table.counts[s] = p;
    }
    return table;
}

CountValue count_words(const Dfa& a) {
    if (is_language_infinite(a)) return CountValue::infinite();
    return CountValue::finite(path_counts(a).total());
}

namespace {

/// Random walk over the path-count DAG: edge (u, σ, v) has weight p_v/p_u
/// and an accepting state stops with weight 1/p_u, so every accepting path
/// has probability exactly 1/p_initial.
class UniformDfaSampler final : public Sampler {
public:
    explicit UniformDfaSampler(PathCountTable table) : table_(std::move(table)) {
        const Dfa& d = table_.trimmed;
        options_.resize(d.state_count);
        weights_.resize(d.state_count);
        for (State s = 0; s < d.state_count; ++s) {
            Rat p(table_.at(s));
            if (d.accepting.count(s)) {
                options_[s].push_back({true, 0, 0});
                weights_[s].push_back(Rat(1) / p);
            }
            for (Symbol sym = 0; sym < d.alphabet.size(); ++sym)
                if (auto u = d.step(s, sym)) {
                    options_[s].push_back({false, sym, *u});
                    weights_[s].push_back(Rat(table_.at(*u)) / p);
                }
        }
    }

    Word draw(RandomBits& rng) const override {
        Word w;
        State s = table_.trimmed.initial;
        for (;;) {
            std::size_t k = pick_weighted(weights_[s], rng);
            const auto& opt = options_[s][k];
            if (opt.stop) return w;
            w.push_back(opt.symbol);
            s = opt.next;
        }
    }

    CountValue support_size() const override { return CountValue::finite(table_.total()); }

    Rat exact_prob(const Word& w) const override {
        if (!table_.trimmed.accepts(w)) return 0;
        return Rat(1) / Rat(table_.total());
    }

    std::vector<Word> support() const override {
        // finite language of a trimmed DFA: no word longer than state_count
        return enumerate_words(table_.trimmed, table_.trimmed.state_count);
    }

    SamplerKind kind() const override { return SamplerKind::Uniform; }

private:
    struct Option {
        bool stop;
        Symbol symbol;
        State next;
    };
    PathCountTable table_;
    std::vector<std::vector<Option>> options_;
    std::vector<std::vector<Rat>> weights_;
};

}  // namespace

SamplerPtr uniform_sampler(const Dfa& a) {
    PathCountTable table = path_counts(a);
    if (table.language_empty || table.total() == 0)
        throw PreconditionError("uniform_sampler requires a non-empty language");
    return std::make_shared<UniformDfaSampler>(std::move(table));
}

namespace {

/// Length-then-lex least words from `seeds` to every state, with ε-edges
/// free.  Dijkstra keyed by the word itself; words stay short because the
/// automaton is trimmed.
std::vector<std::optional<Word>> least_words_from(const Nfa& n,
                                                  const std::set<State>& seeds) {
    std::vector<std::optional<Word>> best(n.state_count);
    using Entry = std::pair<Word, State>;
    auto cmp = [](const Entry& a, const Entry& b) { return word_less(b.first, a.first); };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
    for (State s : seeds) pq.push({{}, s});
    while (!pq.empty()) {
        auto [w, s] = pq.top();
        pq.pop();
        if (best[s]) continue;
        best[s] = w;
        if (auto it = n.eps.find(s); it != n.eps.end())
            for (State t : it->second)
                if (!best[t]) pq.push({w, t});
        for (Symbol sym = 0; sym < n.alphabet.size(); ++sym)
            if (auto it = n.delta.find({s, sym}); it != n.delta.end()) {
                Word w2 = w;
                w2.push_back(sym);
                for (State t : it->second)
                    if (!best[t]) pq.push({w2, t});
            }
    }
    return best;
}

PumpWitness find_pump_witness_impl(const Nfa& a) {
    if (!is_language_infinite(a))
        throw PreconditionError("pump witness requires an infinite language");
    Nfa t = trim(a).first;

    auto from_init = least_words_from(t, t.eps_closure(t.initial_set));
    std::vector<std::vector<std::optional<Word>>> fwd(t.state_count);
    for (State s = 0; s < t.state_count; ++s)
        fwd[s] = least_words_from(t, t.eps_closure({s}));

    std::optional<std::array<Word, 3>> best;
    auto tuple_less = [](const std::array<Word, 3>& a, const std::array<Word, 3>& b) {
        for (int i = 0; i < 3; ++i) {
            if (word_less(a[i], b[i])) return true;
            if (word_less(b[i], a[i])) return false;
        }
        return false;
    };
    for (State s = 0; s < t.state_count; ++s) {
        if (!from_init[s]) continue;
        // least nonempty loop word at s: a first symbol step, then the least
        // word back to s
        std::optional<Word> y;
        for (State t0 : t.eps_closure({s}))
            for (Symbol sym = 0; sym < t.alphabet.size(); ++sym)
                if (auto it = t.delta.find({t0, sym}); it != t.delta.end())
                    for (State u : it->second)
                        if (fwd[u][s]) {
                            Word cand{sym};
                            cand.insert(cand.end(), fwd[u][s]->begin(), fwd[u][s]->end());
                            if (!y || word_less(cand, *y)) y = cand;
                        }
        if (!y) continue;
        std::optional<Word> z;
        for (State acc : t.accepting)
            if (fwd[s][acc] && (!z || word_less(*fwd[s][acc], *z))) z = fwd[s][acc];
        if (!z) continue;
        std::array<Word, 3> cand{*from_init[s], *y, *z};
        if (!best || tuple_less(cand, *best)) best = cand;
    }
    if (!best) throw PreconditionError("no pump witness found");  // unreachable after trim
    return PumpWitness{(*best)[0], (*best)[1], (*best)[2]};
}

class PumpedSampler final : public Sampler {
public:
    PumpedSampler(PumpWitness w, Int n, Int offset)
        : w_(std::move(w)), n_(std::move(n)), offset_(std::move(offset)) {
        if (n_ < 1) throw PreconditionError("pump sampler needs N >= 1");
        if (w_.y.empty()) throw PreconditionError("pump witness has empty loop");
    }

    Word draw(RandomBits& rng) const override {
        return word_at(offset_ + uniform_below(n_, rng));
    }

    CountValue support_size() const override { return CountValue::finite(n_); }

    Rat exact_prob(const Word& w) const override {
        std::size_t base = w_.x.size() + w_.z.size();
        if (w.size() < base || (w.size() - base) % w_.y.size() != 0) return 0;
        Int i((w.size() - base) / w_.y.size());
        if (i < offset_ || i >= offset_ + n_) return 0;
        return w == word_at(i) ? Rat(1) / Rat(n_) : Rat(0);
    }

    std::vector<Word> support() const override {
        if (n_ > 100000)
            throw ResourceError("pump sampler support too large to materialize");
        std::vector<Word> out;
        for (Int i = 0; i < n_; ++i) out.push_back(word_at(offset_ + i));
        return out;
    }

    SamplerKind kind() const override { return SamplerKind::Pumped; }

    const PumpWitness& witness() const { return w_; }

private:
    Word word_at(const Int& reps) const {
        Word out = w_.x;
        for (Int i = 0; i < reps; ++i) out.insert(out.end(), w_.y.begin(), w_.y.end());
        out.insert(out.end(), w_.z.begin(), w_.z.end());
        return out;
    }
    PumpWitness w_;
    Int n_;
    Int offset_;
};

}  // namespace

PumpWitness find_pump_witness(const Dfa& a) {
    return find_pump_witness_impl(dfa_to_nfa(a));
}
PumpWitness find_pump_witness(const Nfa& a) { return find_pump_witness_impl(a); }

SamplerPtr pump_sampler(const PumpWitness& w, const Int& n) {
    return std::make_shared<PumpedSampler>(w, n, 0);
}
SamplerPtr pump_sampler(const Dfa& a, const Int& n) {
    return pump_sampler(find_pump_witness(a), n);
}
SamplerPtr pump_sampler(const Nfa& a, const Int& n) {
    return pump_sampler(find_pump_witness(a), n);
}

SamplerPtr pump_sampler_longer_than(const PumpWitness& w, const Int& n,
                                    std::size_t min_len) {
    std::size_t base = w.x.size() + w.z.size();
    Int j0 = 0;
    if (base <= min_len) j0 = Int((min_len - base) / w.y.size()) + 1;
    return std::make_shared<PumpedSampler>(w, n, j0);
}
SamplerPtr pump_sampler_longer_than(const Nfa& a, const Int& n, std::size_t min_len) {
    return pump_sampler_longer_than(find_pump_witness(a), n, min_len);
}

namespace {

std::vector<Word> enumerate_words_impl(const Nfa& n, std::size_t max_len) {
    std::vector<Word> out;
    // level-by-level frontier of (word, live state set), kept in lex order
    std::vector<std::pair<Word, std::set<State>>> frontier{
        {{}, n.eps_closure(n.initial_set)}};
    auto accepting = [&](const std::set<State>& states) {
        return std::any_of(states.begin(), states.end(),
                           [&](State s) { return n.accepting.count(s) > 0; });
    };
    for (std::size_t len = 0;; ++len) {
        for (const auto& [w, states] : frontier)
            if (accepting(states)) out.push_back(w);
        if (len == max_len) break;
        std::vector<std::pair<Word, std::set<State>>> next;
        for (const auto& [w, states] : frontier)
            for (Symbol sym = 0; sym < n.alphabet.size(); ++sym) {
                std::set<State> succ = n.step(states, sym);
                if (succ.empty()) continue;
                Word w2 = w;
                w2.push_back(sym);
                next.push_back({std::move(w2), std::move(succ)});
            }
        if (next.empty()) break;
        frontier = std::move(next);
    }
    return out;
}

class FiniteSupportSampler final : public Sampler {
public:
    explicit FiniteSupportSampler(std::vector<Word> words) : words_(std::move(words)) {
        if (words_.empty())
            throw PreconditionError("finite support sampler needs at least one word");
    }
    Word draw(RandomBits& rng) const override {
        return words_[static_cast<std::size_t>(uniform_below(Int(words_.size()), rng))];
    }
    CountValue support_size() const override {
        return CountValue::finite(Int(words_.size()));
    }
    Rat exact_prob(const Word& w) const override {
        return std::count(words_.begin(), words_.end(), w)
                   ? Rat(1) / Rat(Int(words_.size()))
                   : Rat(0);
    }
    std::vector<Word> support() const override { return words_; }
    SamplerKind kind() const override { return SamplerKind::Uniform; }

private:
    std::vector<Word> words_;
};

}  // namespace

std::size_t max_word_length(const Dfa& a) {
    auto [t, rep] = trim(a);
    if (rep.kept_states.empty())
        throw PreconditionError("max_word_length on an empty language");
    auto order = topo_order_reverse(t);
    // longest path to an accepting stop, over the trimmed DAG
    std::vector<long long> longest(t.state_count, -1);
    for (auto [s, _] : order) {
        long long best = t.accepting.count(s) ? 0 : -1;
        for (Symbol sym = 0; sym < t.alphabet.size(); ++sym)
            if (auto u = t.step(s, sym))
                if (longest[*u] >= 0) best = std::max(best, longest[*u] + 1);
        longest[s] = best;
    }
    return static_cast<std::size_t>(longest[t.initial]);
}

std::vector<Word> enumerate_words(const Dfa& a, std::size_t max_len) {
    return enumerate_words_impl(dfa_to_nfa(a), max_len);
}
std::vector<Word> enumerate_words(const Nfa& a, std::size_t max_len) {
    return enumerate_words_impl(a, max_len);
}

SamplerPtr finite_support_sampler(std::vector<Word> words) {
    return std::make_shared<FiniteSupportSampler>(std::move(words));
}

}  // namespace ci
