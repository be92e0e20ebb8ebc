#include "ci/automata.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <queue>
#include <sstream>

namespace ci {

using json = nlohmann::json;

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].empty()) throw ConfigError("alphabet label must be non-empty");
        auto [it, fresh] = index_.emplace(labels_[i], static_cast<Symbol>(i));
        if (!fresh) throw ConfigError("duplicate alphabet label: " + labels_[i]);
    }
}

std::optional<Symbol> Alphabet::index(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string Alphabet::format_word(const Word& w) const {
    if (w.empty()) return "<eps>";
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += label(w[i]);
    }
    return out;
}

std::optional<Word> Alphabet::parse_word(const std::string& text) const {
    if (text == "<eps>") return Word{};
    Word w;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        auto idx = index(tok);
        if (!idx) return std::nullopt;
        w.push_back(*idx);
    }
    return w;
}

bool Dfa::accepts(const Word& w) const {
    State s = initial;
    for (Symbol a : w) {
        auto next = step(s, a);
        if (!next) return false;
        s = *next;
    }
    return accepting.count(s) > 0;
}

void Dfa::validate() const {
    if (state_count < 1) throw ConfigError("dfa needs at least one state");
    if (initial >= state_count) throw ConfigError("initial state out of range");
    for (State s : accepting)
        if (s >= state_count) throw ConfigError("accepting state out of range");
    for (const auto& [key, to] : delta) {
        if (key.first >= state_count || to >= state_count)
            throw ConfigError("transition state out of range");
        if (key.second >= alphabet.size()) throw ConfigError("transition symbol out of range");
    }
}

std::set<State> Nfa::eps_closure(const std::set<State>& states) const {
    std::set<State> out = states;
    std::deque<State> work(states.begin(), states.end());
    while (!work.empty()) {
        State s = work.front();
        work.pop_front();
        auto it = eps.find(s);
        if (it == eps.end()) continue;
        for (State t : it->second)
            if (out.insert(t).second) work.push_back(t);
    }
    return out;
}

std::set<State> Nfa::step(const std::set<State>& states, Symbol a) const {
    std::set<State> out;
    for (State s : states) {
        auto it = delta.find({s, a});
        if (it != delta.end()) out.insert(it->second.begin(), it->second.end());
    }
    return eps_closure(out);
}

bool Nfa::accepts(const Word& w) const {
    std::set<State> cur = eps_closure(initial_set);
    for (Symbol a : w) {
        cur = step(cur, a);
        if (cur.empty()) return false;
    }
    return std::any_of(cur.begin(), cur.end(),
                       [&](State s) { return accepting.count(s) > 0; });
}

void Nfa::validate() const {
    if (state_count < 1) throw ConfigError("nfa needs at least one state");
    auto check = [&](State s) {
        if (s >= state_count) throw ConfigError("state out of range");
    };
    for (State s : initial_set) check(s);
    for (State s : accepting) check(s);
    for (const auto& [key, tos] : delta) {
        check(key.first);
        if (key.second >= alphabet.size()) throw ConfigError("transition symbol out of range");
        for (State t : tos) check(t);
    }
    for (const auto& [from, tos] : eps) {
        check(from);
        for (State t : tos) check(t);
    }
}

namespace {

// Generic edge list view used by trim / cycle detection.  ε-edges carry no
// symbol and are included for NFAs.
struct Edges {
    std::vector<std::vector<State>> fwd, rev;
};

Edges edges_of(const Dfa& a) {
    Edges e;
    e.fwd.resize(a.state_count);
    e.rev.resize(a.state_count);
    for (const auto& [key, to] : a.delta) {
        e.fwd[key.first].push_back(to);
        e.rev[to].push_back(key.first);
    }
    return e;
}

Edges edges_of(const Nfa& a) {
    Edges e;
    e.fwd.resize(a.state_count);
    e.rev.resize(a.state_count);
    auto add = [&](State from, State to) {
        e.fwd[from].push_back(to);
        e.rev[to].push_back(from);
    };
    for (const auto& [key, tos] : a.delta)
        for (State to : tos) add(key.first, to);
    for (const auto& [from, tos] : a.eps)
        for (State to : tos) add(from, to);
    return e;
}

std::vector<bool> reach(const std::vector<std::vector<State>>& adj,
                        const std::set<State>& seeds) {
    std::vector<bool> seen(adj.size(), false);
    std::deque<State> work;
    for (State s : seeds) {
        if (!seen[s]) {
            seen[s] = true;
            work.push_back(s);
        }
    }
    while (!work.empty()) {
        State s = work.front();
        work.pop_front();
        for (State t : adj[s])
            if (!seen[t]) {
                seen[t] = true;
                work.push_back(t);
            }
    }
    return seen;
}

TrimReport make_report(State n, const std::vector<bool>& reachable,
                       const std::vector<bool>& useful) {
    TrimReport r;
    State next = 0;
    for (State s = 0; s < n; ++s) {
        if (!reachable[s]) {
            r.removed_unreachable.insert(s);
        } else if (!useful[s]) {
            r.removed_dead.insert(s);
        } else {
            r.kept_states.insert(s);
            r.renumbering[s] = next++;
        }
    }
    return r;
}

bool has_cycle(const std::vector<std::vector<State>>& adj) {
    // iterative three-color DFS
    enum { White, Gray, Black };
    std::vector<int> color(adj.size(), White);
    for (State root = 0; root < adj.size(); ++root) {
        if (color[root] != White) continue;
        std::vector<std::pair<State, std::size_t>> stack{{root, 0}};
        color[root] = Gray;
        while (!stack.empty()) {
            auto& [s, i] = stack.back();
            if (i < adj[s].size()) {
                State t = adj[s][i++];
                if (color[t] == Gray) return true;
                if (color[t] == White) {
                    color[t] = Gray;
                    stack.push_back({t, 0});
                }
            } else {
                color[s] = Black;
                stack.pop_back();
            }
        }
    }
    return false;
}

}  // namespace

Dfa product(const Dfa& a, const Dfa& b) {
    if (!(a.alphabet == b.alphabet)) throw ConfigError("product: alphabet mismatch");
    Dfa out;
    out.alphabet = a.alphabet;
    std::map<std::pair<State, State>, State> ids;
    std::deque<std::pair<State, State>> work;
    auto intern = [&](State x, State y) {
        auto [it, fresh] = ids.emplace(std::make_pair(x, y), static_cast<State>(ids.size()));
        if (fresh) work.push_back({x, y});
        return it->second;
    };
    out.initial = intern(a.initial, b.initial);
    while (!work.empty()) {
        auto [x, y] = work.front();
        work.pop_front();
        State id = ids[{x, y}];
        if (a.accepting.count(x) && b.accepting.count(y)) out.accepting.insert(id);
        for (Symbol sym = 0; sym < a.alphabet.size(); ++sym) {
            auto nx = a.step(x, sym);
            if (!nx) continue;
            auto ny = b.step(y, sym);
            if (!ny) continue;
            out.delta[{id, sym}] = intern(*nx, *ny);
        }
    }
    out.state_count = static_cast<State>(ids.size());
    return trim(out).first;
}

Nfa product(const Nfa& a, const Nfa& b) {
    if (!(a.alphabet == b.alphabet)) throw ConfigError("product: alphabet mismatch");
    Nfa out;
    out.alphabet = a.alphabet;
    std::map<std::pair<State, State>, State> ids;
    std::deque<std::pair<State, State>> work;
    auto intern = [&](State x, State y) {
        auto [it, fresh] = ids.emplace(std::make_pair(x, y), static_cast<State>(ids.size()));
        if (fresh) work.push_back({x, y});
        return it->second;
    };
    for (State x : a.initial_set)
        for (State y : b.initial_set) out.initial_set.insert(intern(x, y));
    while (!work.empty()) {
        auto [x, y] = work.front();
        work.pop_front();
        State id = ids[{x, y}];
        if (a.accepting.count(x) && b.accepting.count(y)) out.accepting.insert(id);
        for (Symbol sym = 0; sym < a.alphabet.size(); ++sym) {
            auto ax = a.delta.find({x, sym});
            auto by = b.delta.find({y, sym});
            if (ax == a.delta.end() || by == b.delta.end()) continue;
            for (State nx : ax->second)
                for (State ny : by->second) out.delta[{id, sym}].insert(intern(nx, ny));
        }
        // ε-moves advance one side while the other waits
        if (auto it = a.eps.find(x); it != a.eps.end())
            for (State nx : it->second) out.eps[id].insert(intern(nx, y));
        if (auto it = b.eps.find(y); it != b.eps.end())
            for (State ny : it->second) out.eps[id].insert(intern(x, ny));
    }
    out.state_count = std::max<State>(1, static_cast<State>(ids.size()));
    return trim(out).first;
}

Dfa complement(const Dfa& a) {
    Dfa out = a;
    State sink = out.state_count;
    bool need_sink = false;
    for (State s = 0; s < out.state_count; ++s)
        for (Symbol sym = 0; sym < out.alphabet.size(); ++sym)
            if (!out.step(s, sym)) {
                out.delta[{s, sym}] = sink;
                need_sink = true;
            }
    if (need_sink) {
        ++out.state_count;
        for (Symbol sym = 0; sym < out.alphabet.size(); ++sym)
            out.delta[{sink, sym}] = sink;
    }
    std::set<State> acc;
    for (State s = 0; s < out.state_count; ++s)
        if (!a.accepting.count(s)) acc.insert(s);
    out.accepting = acc;
    return out;
}

std::pair<Dfa, TrimReport> trim(const Dfa& a) {
    Edges e = edges_of(a);
    auto reachable = reach(e.fwd, {a.initial});
    auto useful = reach(e.rev, a.accepting);
    TrimReport rep = make_report(a.state_count, reachable, useful);
    Dfa out;
    out.alphabet = a.alphabet;
    out.state_count = std::max<State>(1, static_cast<State>(rep.kept_states.size()));
    auto id = [&](State s) -> std::optional<State> {
        auto it = rep.renumbering.find(s);
        if (it == rep.renumbering.end()) return std::nullopt;
        return it->second;
    };
    if (auto i = id(a.initial)) {
        out.initial = *i;
    } else {
        // empty language: single non-accepting state, no transitions
        out.initial = 0;
        return {out, rep};
    }
    for (State s : a.accepting)
        if (auto i = id(s)) out.accepting.insert(*i);
    for (const auto& [key, to] : a.delta) {
        auto f = id(key.first);
        auto t = id(to);
        if (f && t) out.delta[{*f, key.second}] = *t;
    }
    return {out, rep};
}

std::pair<Nfa, TrimReport> trim(const Nfa& a) {
    Edges e = edges_of(a);
    auto reachable = reach(e.fwd, a.initial_set);
    auto useful = reach(e.rev, a.accepting);
    TrimReport rep = make_report(a.state_count, reachable, useful);
    Nfa out;
    out.alphabet = a.alphabet;
    out.state_count = std::max<State>(1, static_cast<State>(rep.kept_states.size()));
    auto id = [&](State s) -> std::optional<State> {
        auto it = rep.renumbering.find(s);
        if (it == rep.renumbering.end()) return std::nullopt;
        return it->second;
    };
    for (State s : a.initial_set)
        if (auto i = id(s)) out.initial_set.insert(*i);
    for (State s : a.accepting)
        if (auto i = id(s)) out.accepting.insert(*i);
    for (const auto& [key, tos] : a.delta) {
        auto f = id(key.first);
        if (!f) continue;
        for (State to : tos)
            if (auto t = id(to)) out.delta[{*f, key.second}].insert(*t);
    }
    for (const auto& [from, tos] : a.eps) {
        auto f = id(from);
        if (!f) continue;
        for (State to : tos)
            if (auto t = id(to)) out.eps[*f].insert(*t);
    }
    return {out, rep};
}

Dfa determinize(const Nfa& n, std::size_t cap) {
    Dfa out;
    out.alphabet = n.alphabet;
    std::map<std::set<State>, State> ids;
    std::deque<std::set<State>> work;
    auto intern = [&](const std::set<State>& subset) {
        auto [it, fresh] = ids.emplace(subset, static_cast<State>(ids.size()));
        if (fresh) {
            if (ids.size() > cap)
                throw ResourceError("determinization cap exceeded (" +
                                    std::to_string(cap) + " subsets)");
            work.push_back(subset);
        }
        return it->second;
    };
    out.initial = intern(n.eps_closure(n.initial_set));
    while (!work.empty()) {
        std::set<State> subset = work.front();
        work.pop_front();
        State id = ids[subset];
        if (std::any_of(subset.begin(), subset.end(),
                        [&](State s) { return n.accepting.count(s) > 0; }))
            out.accepting.insert(id);
        for (Symbol sym = 0; sym < n.alphabet.size(); ++sym) {
            std::set<State> next = n.step(subset, sym);
            if (next.empty()) continue;
            out.delta[{id, sym}] = intern(next);
        }
    }
    out.state_count = static_cast<State>(ids.size());
    return trim(out).first;
}

bool is_language_infinite(const Dfa& a) {
    auto [t, rep] = trim(a);
    if (rep.kept_states.empty()) return false;
    return has_cycle(edges_of(t).fwd);
}

bool is_language_infinite(const Nfa& a) {
    auto [t, rep] = trim(a);
    if (rep.kept_states.empty()) return false;
    return has_cycle(edges_of(t).fwd);
}

Nfa dfa_to_nfa(const Dfa& d) {
    Nfa n;
    n.alphabet = d.alphabet;
    n.state_count = d.state_count;
    n.initial_set = {d.initial};
    n.accepting = d.accepting;
    for (const auto& [key, to] : d.delta) n.delta[key].insert(to);
    return n;
}

Dfa universal_dfa(const Alphabet& alphabet) {
    Dfa d;
    d.alphabet = alphabet;
    d.state_count = 1;
    d.initial = 0;
    d.accepting = {0};
    for (Symbol sym = 0; sym < alphabet.size(); ++sym) d.delta[{0, sym}] = 0;
    return d;
}

namespace {

json transitions_json(const std::map<std::pair<State, Symbol>, State>& delta,
                      const Alphabet& alphabet) {
    json arr = json::array();
    for (const auto& [key, to] : delta)
        arr.push_back({{"from", key.first},
                       {"symbol", alphabet.label(key.second)},
                       {"to", to}});
    return arr;
}

}  // namespace

std::string dfa_to_json(const Dfa& d) {
    json j;
    j["kind"] = "dfa";
    j["alphabet"] = d.alphabet.labels();
    j["states"] = d.state_count;
    j["initial"] = d.initial;
    j["accepting"] = std::vector<State>(d.accepting.begin(), d.accepting.end());
    j["transitions"] = transitions_json(d.delta, d.alphabet);
    return j.dump(2);
}

std::string nfa_to_json(const Nfa& n) {
    json j;
    j["kind"] = "nfa";
    j["alphabet"] = n.alphabet.labels();
    j["states"] = n.state_count;
    j["initial"] = std::vector<State>(n.initial_set.begin(), n.initial_set.end());
    j["accepting"] = std::vector<State>(n.accepting.begin(), n.accepting.end());
    json arr = json::array();
    for (const auto& [key, tos] : n.delta)
        for (State to : tos)
            arr.push_back({{"from", key.first},
                           {"symbol", n.alphabet.label(key.second)},
                           {"to", to}});
    j["transitions"] = arr;
    if (!n.eps.empty()) {
        json eps = json::array();
        for (const auto& [from, tos] : n.eps)
            for (State to : tos) eps.push_back({{"from", from}, {"to", to}});
        j["epsilon"] = eps;
    }
    return j.dump(2);
}

ParsedAutomaton parse_automaton_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid automaton JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("automaton JSON must be an object");
    static const std::set<std::string> known = {"kind",      "alphabet", "states",
                                               "initial",   "accepting", "transitions",
                                               "epsilon"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown field in automaton JSON: " + key);
    for (const char* field : {"kind", "alphabet", "states", "initial", "accepting",
                              "transitions"})
        if (!j.contains(field)) throw ConfigError(std::string("missing field: ") + field);

    std::string kind = j["kind"].get<std::string>();
    if (kind == "pfa")
        throw ConfigError(
            "kind \"pfa\" is not supported: feasibility for probabilistic automata "
            "is undecidable");
    if (kind != "dfa" && kind != "nfa") throw ConfigError("kind must be \"dfa\" or \"nfa\"");

    Alphabet alphabet(j["alphabet"].get<std::vector<std::string>>());
    auto parse_sym = [&](const json& t) {
        auto idx = alphabet.index(t.get<std::string>());
        if (!idx) throw ConfigError("transition symbol not in alphabet");
        return *idx;
    };

    ParsedAutomaton out;
    if (kind == "dfa") {
        if (j.contains("epsilon")) throw ConfigError("dfa cannot have epsilon edges");
        Dfa d;
        d.alphabet = alphabet;
        d.state_count = j["states"].get<State>();
        d.initial = j["initial"].get<State>();
        for (const auto& s : j["accepting"]) d.accepting.insert(s.get<State>());
        for (const auto& t : j["transitions"]) {
            State from = t.at("from").get<State>();
            State to = t.at("to").get<State>();
            Symbol sym = parse_sym(t.at("symbol"));
            auto [it, fresh] = d.delta.emplace(std::make_pair(from, sym), to);
            if (!fresh && it->second != to)
                throw ConfigError("dfa has two targets for one (state, symbol)");
        }
        d.validate();
        out.dfa = std::move(d);
    } else {
        Nfa n;
        n.alphabet = alphabet;
        n.state_count = j["states"].get<State>();
        if (!j["initial"].is_array())
            throw ConfigError("nfa initial must be an array of states");
        for (const auto& s : j["initial"]) n.initial_set.insert(s.get<State>());
        for (const auto& s : j["accepting"]) n.accepting.insert(s.get<State>());
        for (const auto& t : j["transitions"])
            n.delta[{t.at("from").get<State>(), parse_sym(t.at("symbol"))}].insert(
                t.at("to").get<State>());
        if (j.contains("epsilon"))
            for (const auto& t : j["epsilon"])
                n.eps[t.at("from").get<State>()].insert(t.at("to").get<State>());
        n.validate();
        out.nfa = std::move(n);
    }
    return out;
}

}  // namespace ci
