#include "ci/improvise.hpp"

#include "ci/factor_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ci {

Word Improviser::draw(RandomBits& rng) const {
    if (components.size() == 1) return components[0].sampler->draw(rng);
    std::vector<Rat> weights;
    weights.reserve(components.size());
    for (const auto& c : components) weights.push_back(c.weight);
    std::size_t k = pick_weighted(weights, rng);
    return components[k].sampler->draw(rng);
}

void validate_parameters(const Rat& epsilon, const Rat& rho) {
    if (epsilon < 0 || epsilon > 1)
        throw ConfigError("epsilon must lie in [0, 1]");
    if (rho <= 0 || rho > 1) throw ConfigError("rho must lie in (0, 1]");
}

FeasibilityVerdict feasibility(const CountValue& size_I, const CountValue& size_A,
                               const Rat& epsilon, const Rat& rho) {
    validate_parameters(epsilon, rho);
    if (!size_I.is_infinite &&
        (size_A.is_infinite || size_A.value > size_I.value))
        throw ConfigError("inconsistent sizes: |A| exceeds |I|");
    FeasibilityVerdict v;
    v.size_I = size_I;
    v.size_A = size_A;
    v.threshold_I = Rat(1) / rho;
    v.threshold_A = (Rat(1) - epsilon) / rho;
    v.feasible = size_I.at_least(v.threshold_I) && size_A.at_least(v.threshold_A);
    return v;
}

namespace {

Improviser single_component(SamplerPtr sampler, std::string tag, Rat eps, Rat rho,
                            Rat admissible_mass) {
    Improviser imp;
    imp.components.push_back({Rat(1), std::move(sampler)});
    imp.case_tag = std::move(tag);
    imp.certified_epsilon = std::move(eps);
    imp.certified_rho = std::move(rho);
    imp.admissible_mass = std::move(admissible_mass);
    return imp;
}

SynthesisResult infeasible_result(FeasibilityVerdict v) {
    SynthesisResult r;
    r.status = SynthesisStatus::Infeasible;
    r.verdict = std::move(v);
    return r;
}

}  // namespace

SynthesisResult synthesize_dfa(const Dfa& improv, const Dfa& admiss,
                               const Rat& epsilon, const Rat& rho) {
    validate_parameters(epsilon, rho);
    Dfa a = product(improv, admiss);  // admissible improvisations
    CountValue size_I = count_words(improv);
    CountValue size_A = count_words(a);
    FeasibilityVerdict verdict = feasibility(size_I, size_A, epsilon, rho);
    Int inv_rho = ceil_rat(Rat(1) / rho);

    SynthesisResult r;
    if (size_A.is_infinite) {
        // (A) pump an N-subset of the admissible language
        r.status = SynthesisStatus::Ok;
        r.improviser = single_component(pump_sampler(a, inv_rho), "A", Rat(0), rho, Rat(1));
        return r;
    }
    if (size_A.at_least(verdict.threshold_I)) {
        // (B) uniform over all of A; every word gets 1/|A| <= rho
        r.status = SynthesisStatus::Ok;
        r.improviser = single_component(uniform_sampler(a), "B", Rat(0),
                                        Rat(1) / Rat(size_A.value), Rat(1));
        return r;
    }
    if (!size_A.at_least(verdict.threshold_A) || !verdict.feasible)
        return infeasible_result(verdict);

    // (C)/(D): mixture of uniform-over-A and a sampler for I \ A
    Dfa b = product(improv, complement(a));
    Rat mass_a = rho * Rat(size_A.value);
    Improviser imp;
    if (size_A.value > 0)
        imp.components.push_back({mass_a, uniform_sampler(a)});
    if (size_I.is_infinite) {
        Int m = inv_rho - size_A.value;
        imp.components.push_back({Rat(1) - mass_a, pump_sampler(b, m)});
        imp.case_tag = "C";
    } else {
        imp.components.push_back({Rat(1) - mass_a, uniform_sampler(b)});
        imp.case_tag = "D";
    }
    imp.certified_epsilon = epsilon;
    imp.certified_rho = rho;
    imp.admissible_mass = mass_a;
    r.status = SynthesisStatus::Ok;
    r.improviser = std::move(imp);
    return r;
}

namespace {

/// Incremental length-then-lex enumeration of an NFA's language.
class WordEnumerator {
public:
    explicit WordEnumerator(const Nfa& n) : nfa_(n) {
        frontier_.push_back({{}, n.eps_closure(n.initial_set)});
    }

    /// Next accepted word, or nullopt once the language is exhausted.
    std::optional<Word> next() {
        for (;;) {
            while (pos_ < frontier_.size()) {
                const auto& [w, states] = frontier_[pos_++];
                if (std::any_of(states.begin(), states.end(), [&](State s) {
                        return nfa_.accepting.count(s) > 0;
                    }))
                    return w;
            }
            std::vector<std::pair<Word, std::set<State>>> next_level;
            for (const auto& [w, states] : frontier_)
                for (Symbol sym = 0; sym < nfa_.alphabet.size(); ++sym) {
                    std::set<State> succ = nfa_.step(states, sym);
                    if (succ.empty()) continue;
                    Word w2 = w;
                    w2.push_back(sym);
                    next_level.push_back({std::move(w2), std::move(succ)});
                }
            if (next_level.empty()) return std::nullopt;
            frontier_ = std::move(next_level);
            pos_ = 0;
        }
    }

private:
    const Nfa& nfa_;
    std::vector<std::pair<Word, std::set<State>>> frontier_;
    std::size_t pos_ = 0;
};

}  // namespace

SynthesisResult synthesize_enumerative(const Nfa& improv, const ComputablePredicate& alpha,
                                       const Rat& epsilon, const Rat& rho, Int budget) {
    validate_parameters(epsilon, rho);
    if (budget < 1) throw ConfigError("enumeration budget must be at least 1");
    Rat inv_rho = Rat(1) / rho;
    Int n = ceil_rat((Rat(1) - epsilon) / rho);
    Int ceil_inv_rho = ceil_rat(inv_rho);
    bool single_list = Rat(n) >= inv_rho;
    Int want_s = single_list ? ceil_inv_rho : n;
    Int want_t = single_list ? Int(0) : ceil_inv_rho - n;

    std::vector<Word> s_list, t_list;
    std::vector<bool> t_admissible;
    WordEnumerator ener(improv);
    Int examined = 0;
    bool exhausted = false;
    while (Int(s_list.size()) < want_s || Int(t_list.size()) < want_t) {
        if (examined >= budget) break;
        auto w = ener.next();
        if (!w) {
            exhausted = true;
            break;
        }
        ++examined;
        bool adm = alpha(*w);
        if (adm && Int(s_list.size()) < want_s) {
            s_list.push_back(*w);
        } else if (Int(t_list.size()) < want_t) {
            t_list.push_back(*w);
            t_admissible.push_back(adm);
        }
    }

    if (Int(s_list.size()) < want_s || Int(t_list.size()) < want_t) {
        SynthesisResult r;
        r.status = SynthesisStatus::BudgetExhausted;
        r.detail = exhausted ? "improvisation language exhausted before lists filled"
                             : "enumeration budget exhausted";
        return r;
    }

    Improviser imp;
    imp.case_tag = "E-enumerative";
    if (single_list) {
        // uniform over ⌈1/ρ⌉ admissible words
        imp.components.push_back({Rat(1), finite_support_sampler(s_list)});
        imp.certified_epsilon = 0;
        imp.certified_rho = Rat(1) / Rat(ceil_inv_rho);
        imp.admissible_mass = 1;
    } else {
        Rat mass_s = rho * Rat(n);
        if (!s_list.empty())
            imp.components.push_back({mass_s, finite_support_sampler(s_list)});
        imp.components.push_back({Rat(1) - mass_s, finite_support_sampler(t_list)});
        imp.certified_epsilon = epsilon;
        imp.certified_rho = rho;
        Rat t_adm_mass = 0;
        for (std::size_t i = 0; i < t_list.size(); ++i)
            if (t_admissible[i]) t_adm_mass += (Rat(1) - mass_s) / Rat(Int(t_list.size()));
        imp.admissible_mass = mass_s + t_adm_mass;
    }
    SynthesisResult r;
    r.status = SynthesisStatus::Ok;
    r.improviser = std::move(imp);
    return r;
}

SynthesisResult synthesize_nfa_special(const Nfa& improv, const Nfa& admiss,
                                       const Rat& epsilon, const Rat& rho,
                                       std::size_t determinization_cap) {
    validate_parameters(epsilon, rho);
    Nfa prod = product(improv, admiss);
    Int inv_rho = ceil_rat(Rat(1) / rho);

    if (is_language_infinite(prod)) {
        // pumping works on NFAs exactly as on DFAs
        SynthesisResult r;
        r.status = SynthesisStatus::Ok;
        r.improviser = single_component(pump_sampler(prod, inv_rho), "NFA-special-A",
                                        Rat(0), rho, Rat(1));
        return r;
    }

    Dfa a;
    try {
        a = determinize(prod, determinization_cap);
    } catch (const ResourceError&) {
        SynthesisResult r;
        r.status = SynthesisStatus::NotApplicable;
        r.detail = "admissible-language automaton exceeds the determinization cap";
        return r;
    }
    CountValue size_A = count_words(a);

    if (!is_language_infinite(improv)) {
        // both languages finite: only the fully explicit route remains
        Dfa improv_dfa;
        try {
            improv_dfa = determinize(improv, determinization_cap);
        } catch (const ResourceError&) {
            SynthesisResult r;
            r.status = SynthesisStatus::NotApplicable;
            r.detail = "improvisation automaton exceeds the determinization cap";
            return r;
        }
        Dfa admiss_dfa;
        try {
            admiss_dfa = determinize(admiss, determinization_cap);
        } catch (const ResourceError&) {
            SynthesisResult r;
            r.status = SynthesisStatus::NotApplicable;
            r.detail = "admissibility automaton exceeds the determinization cap";
            return r;
        }
        return synthesize_dfa(improv_dfa, admiss_dfa, epsilon, rho);
    }

    // |I| = ∞, |A| finite
    FeasibilityVerdict verdict =
        feasibility(CountValue::infinite(), size_A, epsilon, rho);
    if (size_A.at_least(verdict.threshold_I)) {
        SynthesisResult r;
        r.status = SynthesisStatus::Ok;
        r.improviser = single_component(uniform_sampler(a), "NFA-special-B", Rat(0),
                                        Rat(1) / Rat(size_A.value), Rat(1));
        return r;
    }
    if (!size_A.at_least(verdict.threshold_A)) return infeasible_result(verdict);

    // mixture with words longer than anything A accepts, so supports are
    // disjoint by length
    Rat mass_a = rho * Rat(size_A.value);
    Int m = inv_rho - size_A.value;
    std::size_t min_len = (size_A.value > 0) ? max_word_length(a) : 0;
    Improviser imp;
    if (size_A.value > 0) imp.components.push_back({mass_a, uniform_sampler(a)});
    imp.components.push_back(
        {Rat(1) - mass_a, pump_sampler_longer_than(improv, m, min_len)});
    imp.case_tag = "NFA-special-C";
    imp.certified_epsilon = epsilon;
    imp.certified_rho = rho;
    imp.admissible_mass = mass_a;
    SynthesisResult r;
    r.status = SynthesisStatus::Ok;
    r.improviser = std::move(imp);
    return r;
}

bool VerificationReport::contract_holds(const Rat& epsilon, const Rat& rho) const {
    if (membership_violations > 0 || analytic_support_violations > 0) return false;
    if (analytic_max_prob && *analytic_max_prob > rho) return false;
    if (analytic_admissible_mass && *analytic_admissible_mass < Rat(1) - epsilon)
        return false;
    return true;
}

VerificationReport verify_improviser(const Improviser& imp,
                                     const std::function<bool(const Word&)>& in_improv,
                                     const std::function<bool(const Word&)>& admissible,
                                     std::size_t draws, RandomBits& rng,
                                     std::size_t analytic_support_cap) {
    VerificationReport rep;

    // analytic pass over materialized supports, when exact and small enough
    bool analytic = imp.exact_metadata;
    Int total_support = 0;
    for (const auto& c : imp.components) {
        CountValue sz = c.sampler->support_size();
        if (sz.is_infinite || !c.sampler->exact_metadata()) {
            analytic = false;
            break;
        }
        total_support += sz.value;
    }
    if (analytic && total_support <= Int(analytic_support_cap)) {
        std::map<Word, Rat> dist;
        for (const auto& c : imp.components)
            for (const Word& w : c.sampler->support())
                dist[w] += c.weight * c.sampler->exact_prob(w);
        Rat max_prob = 0, adm_mass = 0;
        for (const auto& [w, p] : dist) {
            max_prob = std::max(max_prob, p);
            if (!in_improv(w)) ++rep.analytic_support_violations;
            if (admissible(w)) adm_mass += p;
        }
        rep.analytic_max_prob = max_prob;
        rep.analytic_admissible_mass = adm_mass;
    }

    rep.draws = draws;
    for (std::size_t i = 0; i < draws; ++i) {
        Word w = imp.draw(rng);
        if (!in_improv(w)) ++rep.membership_violations;
        if (admissible(w)) ++rep.admissible_draws;
    }
    if (draws > 0) {
        double p = static_cast<double>(rep.admissible_draws) / draws;
        rep.admissible_fraction = p;
        const double z = 1.959963984540054;  // 95% Wilson interval
        double nd = static_cast<double>(draws);
        double denom = 1.0 + z * z / nd;
        double center = (p + z * z / (2 * nd)) / denom;
        double half = z * std::sqrt(p * (1 - p) / nd + z * z / (4 * nd * nd)) / denom;
        rep.wilson_low = std::max(0.0, center - half);
        rep.wilson_high = std::min(1.0, center + half);
    }
    return rep;
}

ComputablePredicate hamming_leq_predicate(const Alphabet& alphabet, const Word& reference,
                                          std::size_t distance) {
    std::string name = "hamming_leq(" + alphabet.format_word(reference) + ", " +
                       std::to_string(distance) + ")";
    Word ref = reference;
    return {name, [ref, distance](const Word& w) {
                if (w.size() != ref.size()) return false;
                std::size_t mismatches = 0;
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (w[i] != ref[i]) ++mismatches;
                return mismatches <= distance;
            }};
}

ComputablePredicate factor_window_predicate(const Alphabet& alphabet, const Word& reference,
                                            std::size_t k, std::size_t l, std::size_t h) {
    FactorOracle oracle = build_factor_oracle(alphabet, reference);
    WindowSpec spec{k, l, h};
    spec.validate();
    Dfa window = window_admissibility_dfa(oracle, spec);
    std::string name = "factor_window(" + alphabet.format_word(reference) + ", " +
                       std::to_string(k) + ", " + std::to_string(l) + ", " +
                       std::to_string(h) + ")";
    return {name, [window](const Word& w) { return window.accepts(w); }};
}

}  // namespace ci
