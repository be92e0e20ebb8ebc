// improv: counting, feasibility, synthesis, sampling, verification, and
// factor-oracle workflows for regular-language improvisation instances.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ci/automata.hpp"
#include "ci/count_sample.hpp"
#include "ci/factor_oracle.hpp"
#include "ci/improvise.hpp"
#include "ci/symbolic.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

using Json = nlohmann::json;
using namespace ci;

namespace {

struct RunConfig {
    std::uint64_t seed = 0;
    std::string solver = "internal";
    std::string format = "text";
    std::size_t determinization_cap = kDefaultDeterminizationCap;
    std::size_t diameter_cap = 64;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

/// An automaton reference in an instance file: inline JSON object or a path.
std::string automaton_text(const Json& j) {
    if (j.is_string()) return read_file(j.get<std::string>());
    if (j.is_object()) return j.dump();
    throw ConfigError("automaton must be a JSON object or a file path");
}

bool looks_symbolic(const std::string& text) {
    auto j = Json::parse(text, nullptr, false);
    return j.is_object() && j.contains("state_bits");
}

Dfa as_dfa(const ParsedAutomaton& p, std::size_t cap) {
    if (p.is_dfa()) return *p.dfa;
    return determinize(*p.nfa, cap);
}

Nfa as_nfa(const ParsedAutomaton& p) {
    if (p.is_dfa()) return dfa_to_nfa(*p.dfa);
    return *p.nfa;
}

/// Reference words in predicate specs: space-separated labels, or one
/// character per symbol when every alphabet label is a single character.
Word parse_reference(const Alphabet& alphabet, const std::string& text) {
    if (auto w = alphabet.parse_word(text)) return *w;
    Word w;
    for (char c : text) {
        auto s = alphabet.index(std::string(1, c));
        if (!s) throw ConfigError("reference word uses unknown symbol: " + text);
        w.push_back(*s);
    }
    return w;
}

struct PredicateSpec {
    std::string name;
    std::vector<std::string> args;
};

std::optional<PredicateSpec> parse_predicate_spec(const std::string& text) {
    auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')') return std::nullopt;
    PredicateSpec spec;
    spec.name = text.substr(0, open);
    std::string body = text.substr(open + 1, text.size() - open - 2);
    std::string cur;
    for (char c : body) {
        if (c == ',') {
            spec.args.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    spec.args.push_back(cur);
    for (auto& a : spec.args) {
        while (!a.empty() && a.front() == ' ') a.erase(a.begin());
        while (!a.empty() && a.back() == ' ') a.pop_back();
    }
    return spec;
}

ComputablePredicate build_predicate(const PredicateSpec& spec, const Alphabet& alphabet) {
    if (spec.name == "hamming_leq") {
        if (spec.args.size() != 2)
            throw ConfigError("hamming_leq takes (reference, distance)");
        Word ref = parse_reference(alphabet, spec.args[0]);
        std::size_t d = std::stoul(spec.args[1]);
        return hamming_leq_predicate(alphabet, ref, d);
    }
    if (spec.name == "factor_window") {
        if (spec.args.size() != 4)
            throw ConfigError("factor_window takes (reference, k, l, h)");
        Word ref = parse_reference(alphabet, spec.args[0]);
        return factor_window_predicate(alphabet, ref, std::stoul(spec.args[1]),
                                       std::stoul(spec.args[2]),
                                       std::stoul(spec.args[3]));
    }
    throw ConfigError("unknown builtin predicate: " + spec.name);
}

struct Instance {
    // improv is exactly one of explicit/symbolic; admiss may also be a
    // builtin predicate.
    std::optional<ParsedAutomaton> improv;
    std::optional<SymbolicAutomaton> improv_sym;
    std::optional<ParsedAutomaton> admiss;
    std::optional<SymbolicAutomaton> admiss_sym;
    std::optional<PredicateSpec> predicate;
    Rat epsilon, rho;
};

Instance load_instance(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("invalid instance JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("instance must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (key != "improv" && key != "admiss" && key != "epsilon" && key != "rho")
            throw ConfigError("unknown field in instance: " + key);
    for (const char* key : {"improv", "admiss", "epsilon", "rho"})
        if (!j.contains(key)) throw ConfigError("instance is missing field: " + std::string(key));

    Instance inst;
    auto eps = parse_rational(j["epsilon"].get<std::string>());
    auto rho = parse_rational(j["rho"].get<std::string>());
    if (!eps || !rho) throw ConfigError("epsilon and rho must be rationals \"p/q\"");
    inst.epsilon = *eps;
    inst.rho = *rho;

    std::string improv_text = automaton_text(j["improv"]);
    if (looks_symbolic(improv_text))
        inst.improv_sym = parse_symbolic_json(improv_text);
    else
        inst.improv = parse_automaton_json(improv_text);

    const Json& adm = j["admiss"];
    if (adm.is_string() && parse_predicate_spec(adm.get<std::string>())) {
        inst.predicate = parse_predicate_spec(adm.get<std::string>());
    } else {
        std::string admiss_text = automaton_text(adm);
        if (looks_symbolic(admiss_text))
            inst.admiss_sym = parse_symbolic_json(admiss_text);
        else
            inst.admiss = parse_automaton_json(admiss_text);
    }
    return inst;
}

const Alphabet& instance_alphabet(const Instance& inst) {
    if (inst.improv_sym) return inst.improv_sym->alphabet;
    return inst.improv->is_dfa() ? inst.improv->dfa->alphabet
                                 : inst.improv->nfa->alphabet;
}

int cmd_count(const RunConfig& cfg, const std::string& path) {
    std::string text = read_file(path);
    if (looks_symbolic(text)) {
        auto oracle = make_solver(cfg.solver);
        SymbolicAutomaton s = parse_symbolic_json(text);
        RandomBits rng(cfg.seed);
        std::size_t d = diameter(s, *oracle, cfg.diameter_cap).diameter;
        ApproxCountResult c = approx_count(s, *oracle, Rat(1, 2), 0.1, d, rng);
        std::cout << (c.is_infinite ? std::string("inf") : c.estimate.str()) << "\n";
        return 0;
    }
    Dfa d = as_dfa(parse_automaton_json(text), cfg.determinization_cap);
    CountValue c = count_words(d);
    if (cfg.format == "json-lines")
        std::cout << Json{{"count", c.str()}}.dump() << "\n";
    else
        std::cout << c.str() << "\n";
    return 0;
}

std::pair<CountValue, CountValue> instance_sizes(const Instance& inst,
                                                 const RunConfig& cfg) {
    Dfa improv = as_dfa(*inst.improv, cfg.determinization_cap);
    CountValue size_I = count_words(improv);
    if (inst.admiss) {
        Dfa admiss = as_dfa(*inst.admiss, cfg.determinization_cap);
        return {size_I, count_words(product(improv, admiss))};
    }
    if (!inst.predicate) throw ConfigError("symbolic admissibility needs --symbolic");
    if (size_I.is_infinite)
        throw ConfigError(
            "cannot count admissible words of an infinite language under a "
            "computable predicate; supply an admissibility automaton");
    ComputablePredicate pred = build_predicate(*inst.predicate, improv.alphabet);
    std::size_t len = (size_I.value > 0) ? max_word_length(improv) : 0;
    Int admissible = 0;
    for (const Word& w : enumerate_words(improv, len))
        if (pred(w)) ++admissible;
    return {size_I, CountValue::finite(admissible)};
}

std::string verdict_line(const FeasibilityVerdict& v) {
    std::ostringstream out;
    out << (v.feasible ? "feasible" : "infeasible") << " " << v.size_I.str() << " "
        << v.size_A.str() << " " << rat_to_string(v.threshold_I) << " "
        << rat_to_string(v.threshold_A);
    return out.str();
}

int cmd_feasible(const RunConfig& cfg, const std::string& path) {
    Instance inst = load_instance(path);
    if (inst.improv_sym || inst.admiss_sym)
        throw ConfigError("feasible works on explicit automata; use improvise --symbolic");
    auto [size_I, size_A] = instance_sizes(inst, cfg);
    FeasibilityVerdict v = feasibility(size_I, size_A, inst.epsilon, inst.rho);
    if (cfg.format == "json-lines")
        std::cout << Json{{"feasible", v.feasible},
                          {"size_I", v.size_I.str()},
                          {"size_A", v.size_A.str()},
                          {"threshold_I", rat_to_string(v.threshold_I)},
                          {"threshold_A", rat_to_string(v.threshold_A)}}
                         .dump()
                  << "\n";
    else
        std::cout << verdict_line(v) << "\n";
    return v.feasible ? 0 : 2;
}

struct SymbolicPair {
    SymbolicAutomaton improv, admiss;
};

SymbolicPair symbolic_pair(const Instance& inst, const RunConfig& cfg) {
    SymbolicPair p;
    p.improv = inst.improv_sym ? *inst.improv_sym
                               : encode_dfa(as_dfa(*inst.improv, cfg.determinization_cap));
    if (inst.admiss_sym)
        p.admiss = *inst.admiss_sym;
    else if (inst.admiss)
        p.admiss = encode_dfa(as_dfa(*inst.admiss, cfg.determinization_cap));
    else
        throw ConfigError("the symbolic scheme needs an automaton admissibility spec");
    return p;
}

SynthesisResult synthesize_instance(const Instance& inst, const RunConfig& cfg,
                                    bool symbolic, const Rat& tau, double delta,
                                    std::optional<std::size_t> diameter_bound,
                                    RandomBits& rng, Int budget) {
    if (symbolic || inst.improv_sym || inst.admiss_sym) {
        SymbolicPair p = symbolic_pair(inst, cfg);
        SymbolicConfig sc;
        sc.tau = tau;
        sc.delta = delta;
        sc.diameter_bound = diameter_bound;
        sc.diameter_cap = cfg.diameter_cap;
        std::shared_ptr<SolverOracle> oracle = make_solver(cfg.solver);
        return synthesize_symbolic(p.improv, p.admiss, inst.epsilon, inst.rho, sc,
                                   oracle, rng);
    }
    if (inst.predicate) {
        Nfa improv = as_nfa(*inst.improv);
        ComputablePredicate pred = build_predicate(*inst.predicate, improv.alphabet);
        return synthesize_enumerative(improv, pred, inst.epsilon, inst.rho, budget);
    }
    if (inst.improv->is_dfa() && inst.admiss->is_dfa())
        return synthesize_dfa(*inst.improv->dfa, *inst.admiss->dfa, inst.epsilon,
                              inst.rho);
    return synthesize_nfa_special(as_nfa(*inst.improv), as_nfa(*inst.admiss),
                                  inst.epsilon, inst.rho, cfg.determinization_cap);
}

std::string certificate_line(const Improviser& imp) {
    std::ostringstream out;
    out << "case=" << imp.case_tag << " eps=" << rat_to_string(imp.certified_epsilon)
        << " rho=" << rat_to_string(imp.certified_rho) << " weights=";
    for (std::size_t i = 0; i < imp.components.size(); ++i) {
        if (i) out << ",";
        out << rat_to_string(imp.components[i].weight);
    }
    out << " admissible_mass" << (imp.admissible_mass_exact ? "=" : ">=")
        << rat_to_string(imp.admissible_mass);
    return out.str();
}

/// Shared failure handling for commands that synthesize: infeasible → 2,
/// not-applicable / exhausted budgets → 3.
int report_failure(const SynthesisResult& r) {
    if (r.status == SynthesisStatus::Infeasible) {
        std::cerr << (r.verdict ? verdict_line(*r.verdict) : std::string("infeasible"))
                  << "\n";
        return 2;
    }
    std::cerr << (r.status == SynthesisStatus::NotApplicable ? "not applicable: "
                                                             : "budget exhausted: ")
              << r.detail << "\n";
    return 3;
}

int cmd_improvise(const RunConfig& cfg, const std::string& path, std::size_t n,
                  bool symbolic, const Rat& tau, double delta,
                  std::optional<std::size_t> diameter_bound, Int budget) {
    Instance inst = load_instance(path);
    RandomBits rng(cfg.seed);
    SynthesisResult r = synthesize_instance(inst, cfg, symbolic, tau, delta,
                                            diameter_bound, rng, budget);
    if (!r.ok()) return report_failure(r);

    const Alphabet& alphabet = instance_alphabet(inst);
    const Improviser& imp = *r.improviser;
    for (std::size_t i = 0; i < n; ++i)
        std::cout << alphabet.format_word(imp.draw(rng)) << "\n";
    if (cfg.format == "json-lines") {
        Json weights = Json::array();
        for (const auto& c : imp.components) weights.push_back(rat_to_string(c.weight));
        std::cerr << Json{{"case", imp.case_tag},
                          {"eps", rat_to_string(imp.certified_epsilon)},
                          {"rho", rat_to_string(imp.certified_rho)},
                          {"weights", weights},
                          {"admissible_mass", rat_to_string(imp.admissible_mass)},
                          {"admissible_mass_exact", imp.admissible_mass_exact}}
                         .dump()
                  << "\n";
    } else {
        std::cerr << certificate_line(imp) << "\n";
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& path, std::size_t draws,
               bool symbolic, const Rat& tau, double delta,
               std::optional<std::size_t> diameter_bound, Int budget) {
    Instance inst = load_instance(path);
    RandomBits rng(cfg.seed);
    SynthesisResult r = synthesize_instance(inst, cfg, symbolic, tau, delta,
                                            diameter_bound, rng, budget);
    if (!r.ok()) return report_failure(r);

    // Membership checks run on the explicit forms; symbolic instances need
    // explicit twins only when the inputs were inline symbolic files.
    std::function<bool(const Word&)> in_improv, admissible;
    if (inst.improv) {
        Nfa improv = as_nfa(*inst.improv);
        in_improv = [improv](const Word& w) { return improv.accepts(w); };
    } else {
        auto oracle = std::shared_ptr<SolverOracle>(make_solver(cfg.solver));
        SymbolicAutomaton s = *inst.improv_sym;
        in_improv = [s, oracle](const Word& w) {
            return symbolic_accepts(s, w, *oracle);
        };
    }
    if (inst.predicate) {
        ComputablePredicate pred =
            build_predicate(*inst.predicate, instance_alphabet(inst));
        admissible = pred.fn;
    } else if (inst.admiss) {
        Nfa admiss = as_nfa(*inst.admiss);
        admissible = [admiss](const Word& w) { return admiss.accepts(w); };
    } else {
        auto oracle = std::shared_ptr<SolverOracle>(make_solver(cfg.solver));
        SymbolicAutomaton s = *inst.admiss_sym;
        admissible = [s, oracle](const Word& w) {
            return symbolic_accepts(s, w, *oracle);
        };
    }

    VerificationReport rep =
        verify_improviser(*r.improviser, in_improv,
                          [&](const Word& w) { return in_improv(w) && admissible(w); },
                          draws, rng);
    Json out;
    out["case"] = r.improviser->case_tag;
    out["certified_eps"] = rat_to_string(r.improviser->certified_epsilon);
    out["certified_rho"] = rat_to_string(r.improviser->certified_rho);
    if (rep.analytic_max_prob) out["analytic_max_prob"] = rat_to_string(*rep.analytic_max_prob);
    if (rep.analytic_admissible_mass)
        out["analytic_admissible_mass"] = rat_to_string(*rep.analytic_admissible_mass);
    out["analytic_support_violations"] = rep.analytic_support_violations;
    out["draws"] = rep.draws;
    out["admissible_draws"] = rep.admissible_draws;
    out["membership_violations"] = rep.membership_violations;
    out["admissible_fraction"] = rep.admissible_fraction;
    out["wilson_low"] = rep.wilson_low;
    out["wilson_high"] = rep.wilson_high;
    out["contract_holds"] =
        rep.contract_holds(r.improviser->certified_epsilon, r.improviser->certified_rho);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_oracle(const std::string& ref, const std::vector<std::size_t>& window) {
    if (ref.empty()) throw ConfigError("reference word must be non-empty");
    std::vector<std::string> labels;
    for (char c : ref) {
        std::string l(1, c);
        if (std::find(labels.begin(), labels.end(), l) == labels.end())
            labels.push_back(l);
    }
    Alphabet alphabet(labels);
    Word w;
    for (char c : ref) w.push_back(*alphabet.index(std::string(1, c)));
    FactorOracle oracle = build_factor_oracle(alphabet, w);
    if (window.empty()) {
        std::cout << nfa_to_json(oracle_as_nfa(oracle, true)) << "\n";
        return 0;
    }
    WindowSpec spec{window[0], window[1], window[2]};
    std::cout << dfa_to_json(window_admissibility_dfa(oracle, spec)) << "\n";
    return 0;
}

int cmd_symbolic_count(const RunConfig& cfg, const std::string& path, const Rat& tau,
                       double delta, std::optional<std::size_t> diameter_bound) {
    SymbolicAutomaton s = parse_symbolic_json(read_file(path));
    auto oracle = make_solver(cfg.solver);
    RandomBits rng(cfg.seed);
    std::size_t d = diameter_bound ? *diameter_bound
                                   : diameter(s, *oracle, cfg.diameter_cap).diameter;
    ApproxCountResult c = approx_count(s, *oracle, tau, delta, d, rng);
    if (c.is_infinite)
        std::cout << "inf\n";
    else
        std::cout << c.estimate.str() << (c.exact ? " exact" : " estimate") << "\n";
    return 0;
}

int cmd_symbolic_diameter(const RunConfig& cfg, const std::string& path) {
    SymbolicAutomaton s = parse_symbolic_json(read_file(path));
    auto oracle = make_solver(cfg.solver);
    std::cout << diameter(s, *oracle, cfg.diameter_cap).diameter << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regular-language control improvisation toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "random seed (default 0)");
    app.add_option("--solver", cfg.solver, "\"internal\" or path to a DIMACS solver");
    app.add_option("--format", cfg.format, "output format: text | json-lines")
        ->check(CLI::IsMember({"text", "json-lines"}));
    app.add_option("--determinization-cap", cfg.determinization_cap,
                   "max subsets when determinizing NFAs");
    app.add_option("--diameter-cap", cfg.diameter_cap, "max diameter search depth");

    std::string path, ref;
    std::size_t n_draws = 10, verify_draws = 100000;
    bool symbolic = false;
    std::string tau_text = "7";
    double delta = 0.2;
    std::optional<std::size_t> diameter_bound;
    std::size_t diameter_bound_raw = 0;
    Int budget = 1000000;
    std::uint64_t budget_raw = 1000000;
    std::vector<std::size_t> window;

    auto* count = app.add_subcommand("count", "count the words an automaton accepts");
    count->add_option("automaton", path, "automaton JSON file")->required();

    auto* feasible = app.add_subcommand("feasible", "decide instance feasibility");
    feasible->add_option("instance", path, "instance JSON file")->required();

    auto add_scheme_flags = [&](CLI::App* c) {
        c->add_flag("--symbolic", symbolic, "use the approximate symbolic scheme");
        c->add_option("--tau", tau_text, "counting/sampling tolerance (rational)");
        c->add_option("--delta", delta, "counting failure probability");
        c->add_option("--diameter-bound", diameter_bound_raw,
                      "skip diameter search with this bound")
            ->each([&](const std::string&) { diameter_bound = diameter_bound_raw; });
        c->add_option("--budget", budget_raw, "enumeration budget for predicates");
    };

    auto* improvise = app.add_subcommand("improvise", "synthesize and draw words");
    improvise->add_option("instance", path, "instance JSON file")->required();
    improvise->add_option("--n", n_draws, "number of words to draw");
    add_scheme_flags(improvise);

    auto* verify = app.add_subcommand("verify", "synthesize and audit the distribution");
    verify->add_option("instance", path, "instance JSON file")->required();
    verify->add_option("--draws", verify_draws, "Monte-Carlo draw count");
    add_scheme_flags(verify);

    auto* oracle = app.add_subcommand("oracle", "build a factor oracle from a word");
    oracle->add_option("reference", ref, "reference word (one char per symbol)")
        ->required();
    oracle->add_option("--window", window, "k l h: emit the window-admissibility DFA")
        ->expected(3);

    auto* scount = app.add_subcommand("symbolic-count", "approximate symbolic count");
    scount->add_option("automaton", path, "symbolic automaton JSON file")->required();
    add_scheme_flags(scount);

    auto* sdiam = app.add_subcommand("symbolic-diameter", "diameter of a symbolic automaton");
    sdiam->add_option("automaton", path, "symbolic automaton JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage/parse problems exit 1
    }
    budget = Int(budget_raw);

    try {
        auto tau = parse_rational(tau_text);
        if (!tau || *tau <= 0) throw ConfigError("tau must be a positive rational");
        if (count->parsed()) return cmd_count(cfg, path);
        if (feasible->parsed()) return cmd_feasible(cfg, path);
        if (improvise->parsed())
            return cmd_improvise(cfg, path, n_draws, symbolic, *tau, delta,
                                 diameter_bound, budget);
        if (verify->parsed())
            return cmd_verify(cfg, path, verify_draws, symbolic, *tau, delta,
                              diameter_bound, budget);
        if (oracle->parsed()) return cmd_oracle(ref, window);
        if (scount->parsed())
            return cmd_symbolic_count(cfg, path, *tau, delta, diameter_bound);
        if (sdiam->parsed()) return cmd_symbolic_diameter(cfg, path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
