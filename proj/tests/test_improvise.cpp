#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ci/improvise.hpp"
#include "audit.hpp"
#include "fixtures.hpp"

#include <map>
#include <set>

using namespace ci;
using namespace fixtures;

namespace {

Dfa admissible_product() { return product(no11_len3(), hamming_001()); }

/// DFA over {a, b} accepting exactly {b, ab}.
Dfa b_or_ab() {
    Dfa d;
    d.alphabet = ab();
    d.state_count = 3;
    d.initial = 0;
    d.accepting = {2};
    d.delta[{0, 0}] = 1;  // a
    d.delta[{0, 1}] = 2;  // b
    d.delta[{1, 1}] = 2;  // ab
    return d;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(validate_parameters(Rat(0), Rat(1)));
    CHECK_NOTHROW(validate_parameters(Rat(1), Rat(1, 8)));
    CHECK_THROWS_AS(validate_parameters(Rat(-1, 2), Rat(1, 2)), ConfigError);
    CHECK_THROWS_AS(validate_parameters(Rat(5, 4), Rat(1, 2)), ConfigError);
    CHECK_THROWS_AS(validate_parameters(Rat(0), Rat(0)), ConfigError);
    CHECK_THROWS_AS(validate_parameters(Rat(0), Rat(9, 8)), ConfigError);
}

TEST_CASE("feasibility on the running-example counts") {
    auto five = CountValue::finite(5);
    auto three = CountValue::finite(3);

    FeasibilityVerdict v1 = feasibility(five, three, Rat(0), Rat(1, 4));
    CHECK(!v1.feasible);
    CHECK(v1.threshold_I == 4);
    CHECK(v1.threshold_A == 4);

    FeasibilityVerdict v2 = feasibility(five, three, Rat(1, 4), Rat(1, 4));
    CHECK(v2.feasible);
    CHECK(v2.threshold_A == 3);

    CHECK(feasibility(five, three, Rat(0), Rat(1, 3)).feasible);
    CHECK(feasibility(CountValue::infinite(), CountValue::infinite(), Rat(0), Rat(1, 100))
              .feasible);

    CHECK_THROWS_AS(feasibility(three, five, Rat(0), Rat(1, 4)), ConfigError);
}

TEST_CASE("running example synthesizes the exact case-D distribution") {
    SynthesisResult r = synthesize_dfa(no11_len3(), hamming_001(), Rat(1, 4), Rat(1, 4));
    REQUIRE(r.ok());
    const Improviser& imp = *r.improviser;
    CHECK(imp.case_tag == "D");
    CHECK(imp.certified_epsilon == Rat(1, 4));
    CHECK(imp.certified_rho == Rat(1, 4));
    CHECK(imp.admissible_mass == Rat(3, 4));

    Alphabet bin = binary();
    DistributionAudit audit = audit_distribution(imp);
    CHECK(audit.total == 1);
    CHECK(audit.probs ==
          std::map<Word, Rat>{{word_of(bin, "000"), Rat(1, 4)},
                              {word_of(bin, "001"), Rat(1, 4)},
                              {word_of(bin, "101"), Rat(1, 4)},
                              {word_of(bin, "010"), Rat(1, 8)},
                              {word_of(bin, "100"), Rat(1, 8)}});
}

TEST_CASE("running example is infeasible at epsilon 0") {
    SynthesisResult r = synthesize_dfa(no11_len3(), hamming_001(), Rat(0), Rat(1, 4));
    CHECK(r.status == SynthesisStatus::Infeasible);
    REQUIRE(r.verdict.has_value());
    CHECK(r.verdict->size_I == CountValue::finite(5));
    CHECK(r.verdict->size_A == CountValue::finite(3));
}

TEST_CASE("case A on the universal language") {
    Dfa all = sigma_star(binary());
    SynthesisResult r = synthesize_dfa(all, all, Rat(0), Rat(1, 10));
    REQUIRE(r.ok());
    CHECK(r.improviser->case_tag == "A");
    DistributionAudit audit = audit_distribution(*r.improviser);
    CHECK(audit.probs.size() == 10);
    for (const auto& [w, p] : audit.probs) CHECK(p == Rat(1, 10));
}

TEST_CASE("case B when the admissible set is large enough") {
    SynthesisResult r = synthesize_dfa(no11_len3(), sigma_star(binary()), Rat(0), Rat(1, 4));
    REQUIRE(r.ok());
    CHECK(r.improviser->case_tag == "B");
    CHECK(r.improviser->certified_rho == Rat(1, 5));
    DistributionAudit audit = audit_distribution(*r.improviser);
    CHECK(audit.max_prob == Rat(1, 5));
}

TEST_CASE("case C mixes uniform A with pumped I minus A") {
    SynthesisResult r = synthesize_dfa(astar_b(), b_or_ab(), Rat(1, 2), Rat(1, 4));
    REQUIRE(r.ok());
    const Improviser& imp = *r.improviser;
    CHECK(imp.case_tag == "C");
    CHECK(imp.admissible_mass == Rat(1, 2));
    DistributionAudit audit = audit_distribution(imp);
    CHECK(audit.total == 1);
    CHECK(audit.max_prob <= Rat(1, 4));
    Dfa improv = astar_b();
    Dfa admiss = b_or_ab();
    Rat admissible_mass = 0;
    for (const auto& [w, p] : audit.probs) {
        CHECK(improv.accepts(w));
        if (admiss.accepts(w)) admissible_mass += p;
    }
    CHECK(admissible_mass == Rat(1, 2));
}

TEST_CASE("enumerative scheme on the running example") {
    ComputablePredicate alpha =
        hamming_leq_predicate(binary(), word_of(binary(), "001"), 1);
    SynthesisResult r = synthesize_enumerative(dfa_to_nfa(no11_len3()), alpha,
                                               Rat(1, 4), Rat(1, 4), Int(100000));
    REQUIRE(r.ok());
    const Improviser& imp = *r.improviser;
    CHECK(imp.case_tag == "E-enumerative");
    Alphabet bin = binary();
    DistributionAudit audit = audit_distribution(imp);
    CHECK(audit.probs ==
          std::map<Word, Rat>{{word_of(bin, "000"), Rat(1, 4)},
                              {word_of(bin, "001"), Rat(1, 4)},
                              {word_of(bin, "101"), Rat(1, 4)},
                              {word_of(bin, "010"), Rat(1, 4)}});
    CHECK(imp.admissible_mass == Rat(3, 4));
    CHECK(imp.certified_epsilon == Rat(1, 4));
    CHECK(imp.certified_rho == Rat(1, 4));
}

TEST_CASE("enumerative scheme with epsilon 1 is uniform on a prefix of I") {
    ComputablePredicate never{"never", [](const Word&) { return false; }};
    SynthesisResult r = synthesize_enumerative(dfa_to_nfa(no11_len3()), never, Rat(1),
                                               Rat(1, 4), Int(100000));
    REQUIRE(r.ok());
    DistributionAudit audit = audit_distribution(*r.improviser);
    Alphabet bin = binary();
    // first ceil(1/rho) = 4 improvisations in length-lex order
    CHECK(audit.probs ==
          std::map<Word, Rat>{{word_of(bin, "000"), Rat(1, 4)},
                              {word_of(bin, "001"), Rat(1, 4)},
                              {word_of(bin, "010"), Rat(1, 4)},
                              {word_of(bin, "100"), Rat(1, 4)}});
}

TEST_CASE("enumerative scheme detects exhausted finite languages") {
    ComputablePredicate always{"always", [](const Word&) { return true; }};
    SynthesisResult r = synthesize_enumerative(dfa_to_nfa(no11_len3()), always, Rat(0),
                                               Rat(1, 8), Int(100000));
    CHECK(r.status == SynthesisStatus::BudgetExhausted);
    CHECK(r.detail.find("exhausted") != std::string::npos);
}

TEST_CASE("NFA special case: infinite admissible product pumps") {
    // admissible product has a reachable accepting cycle
    Nfa improv = dfa_to_nfa(sigma_star(binary()));
    SynthesisResult r = synthesize_nfa_special(improv, improv, Rat(0), Rat(1, 6));
    REQUIRE(r.ok());
    CHECK(r.improviser->case_tag == "NFA-special-A");
    DistributionAudit audit = audit_distribution(*r.improviser);
    CHECK(audit.probs.size() == 6);
}

TEST_CASE("NFA special case: finite A, infinite I, disjoint by length") {
    SynthesisResult r = synthesize_nfa_special(dfa_to_nfa(astar_b()),
                                               dfa_to_nfa(b_or_ab()), Rat(1, 2),
                                               Rat(1, 4));
    REQUIRE(r.ok());
    const Improviser& imp = *r.improviser;
    CHECK(imp.case_tag == "NFA-special-C");
    CHECK(imp.admissible_mass == Rat(1, 2));
    REQUIRE(imp.components.size() == 2);
    Alphabet aab = ab();
    // pump words must be longer than anything {b, ab} accepts, so the
    // supports are disjoint by length
    auto second = imp.components[1].sampler->support();
    CHECK(second == std::vector<Word>{word_of(aab, "aab"), word_of(aab, "aaab")});
    Dfa admiss = b_or_ab();
    for (const auto& w : second) {
        CHECK(w.size() > 2);
        CHECK(astar_b().accepts(w));
        CHECK(!admiss.accepts(w));
    }
    DistributionAudit audit = audit_distribution(imp);
    CHECK(audit.max_prob <= Rat(1, 4));
}

TEST_CASE("NFA special case: both finite under the cap delegates to the DFA scheme") {
    SynthesisResult r = synthesize_nfa_special(dfa_to_nfa(no11_len3()),
                                               dfa_to_nfa(hamming_001()), Rat(1, 4),
                                               Rat(1, 4));
    REQUIRE(r.ok());
    CHECK(r.improviser->case_tag == "D");
}

TEST_CASE("NFA special case: cap exhaustion is not-applicable") {
    SynthesisResult r = synthesize_nfa_special(dfa_to_nfa(no11_len3()),
                                               dfa_to_nfa(hamming_001()), Rat(1, 4),
                                               Rat(1, 4), 2);
    CHECK(r.status == SynthesisStatus::NotApplicable);
    CHECK(!r.detail.empty());
}

TEST_CASE("improviser draws stay inside I and hit the admissible mass") {
    SynthesisResult r = synthesize_dfa(no11_len3(), hamming_001(), Rat(1, 4), Rat(1, 4));
    REQUIRE(r.ok());
    Dfa improv = no11_len3();
    Dfa admiss = hamming_001();
    RandomBits rng(31);
    int admissible = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        Word w = r.improviser->draw(rng);
        REQUIRE(improv.accepts(w));
        if (admiss.accepts(w)) ++admissible;
    }
    double fraction = double(admissible) / draws;
    CHECK(fraction > 0.74);
    CHECK(fraction < 0.76);
}

TEST_CASE("verify_improviser audits the running example") {
    SynthesisResult r = synthesize_dfa(no11_len3(), hamming_001(), Rat(1, 4), Rat(1, 4));
    REQUIRE(r.ok());
    Dfa improv = no11_len3();
    Dfa admiss = product(no11_len3(), hamming_001());
    RandomBits rng(32);
    VerificationReport rep = verify_improviser(
        *r.improviser, [&](const Word& w) { return improv.accepts(w); },
        [&](const Word& w) { return admiss.accepts(w); }, 100000, rng);
    REQUIRE(rep.analytic_max_prob.has_value());
    CHECK(*rep.analytic_max_prob == Rat(1, 4));
    REQUIRE(rep.analytic_admissible_mass.has_value());
    CHECK(*rep.analytic_admissible_mass == Rat(3, 4));
    CHECK(rep.analytic_support_violations == 0);
    CHECK(rep.membership_violations == 0);
    CHECK(rep.admissible_fraction > 0.74);
    CHECK(rep.contract_holds(Rat(1, 4), Rat(1, 4)));
}

TEST_CASE("verify_improviser flags a broken improviser") {
    // weight 1 on a single inadmissible word
    Alphabet bin = binary();
    Improviser broken;
    broken.components.push_back({Rat(1), finite_support_sampler({word_of(bin, "010")})});
    broken.case_tag = "negative-control";
    broken.certified_epsilon = Rat(1, 4);
    broken.certified_rho = Rat(1, 4);
    broken.admissible_mass = Rat(3, 4);
    Dfa improv = no11_len3();
    Dfa admiss = product(no11_len3(), hamming_001());
    RandomBits rng(33);
    VerificationReport rep = verify_improviser(
        broken, [&](const Word& w) { return improv.accepts(w); },
        [&](const Word& w) { return admiss.accepts(w); }, 2000, rng);
    REQUIRE(rep.analytic_admissible_mass.has_value());
    CHECK(*rep.analytic_admissible_mass == 0);
    CHECK(!rep.contract_holds(Rat(1, 4), Rat(1, 4)));
}

TEST_CASE("case-A improviser has analytic max prob at most rho") {
    Dfa all = sigma_star(binary());
    SynthesisResult r = synthesize_dfa(all, all, Rat(0), Rat(2, 7));
    REQUIRE(r.ok());
    DistributionAudit audit = audit_distribution(*r.improviser);
    CHECK(audit.max_prob == Rat(1, 4));  // 1/ceil(7/2)
    CHECK(audit.max_prob <= Rat(2, 7));
}

TEST_CASE("synthesis matches feasibility on 500 random instances") {
    RandomBits rng(34);
    int produced = 0;
    for (int round = 0; round < 500; ++round) {
        Dfa improv = random_dfa(rng, 5);
        Dfa admiss = random_dfa(rng, 5);
        admiss.alphabet = improv.alphabet;
        Rat eps(rng.below(9), 8);
        Rat rho(1 + rng.below(8), 8);
        CountValue size_I = count_words(improv);
        CountValue size_A = count_words(product(improv, admiss));
        bool expect = feasibility(size_I, size_A, eps, rho).feasible;
        SynthesisResult r = synthesize_dfa(improv, admiss, eps, rho);
        CHECK(r.ok() == expect);
        if (!r.ok()) continue;
        ++produced;
        // Def. 2.3 three-bullet audit from exact metadata
        DistributionAudit audit = audit_distribution(*r.improviser);
        CHECK(audit.total == 1);
        CHECK(audit.max_prob <= rho);
        Rat admissible_mass = 0;
        for (const auto& [w, p] : audit.probs) {
            CHECK(improv.accepts(w));
            if (admiss.accepts(w)) admissible_mass += p;
        }
        CHECK(admissible_mass >= 1 - eps);
    }
    CHECK(produced > 100);
}

TEST_CASE("builtin predicates") {
    Alphabet bin = binary();
    ComputablePredicate h = hamming_leq_predicate(bin, word_of(bin, "001"), 1);
    CHECK(h(word_of(bin, "001")));
    CHECK(h(word_of(bin, "101")));
    CHECK(!h(word_of(bin, "110")));
    CHECK(!h(word_of(bin, "0011")));  // length mismatch
    CHECK(!h(Word{}));
}
