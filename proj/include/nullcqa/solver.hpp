#ifndef NULLCQA_SOLVER_HPP
#define NULLCQA_SOLVER_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nullcqa/error.hpp"
#include "nullcqa/program.hpp"
#include "nullcqa/value.hpp"

namespace nullcqa {

/// A variable-free rule over atom ids of the owning GroundProgram.
struct GroundRule {
    std::vector<int> head;
    std::vector<int> positive;
    std::vector<int> negative;
    RuleKind kind = RuleKind::Other;
    std::string provenance;

    bool is_denial() const { return head.empty(); }
    bool is_disjunctive() const { return head.size() > 1; }
    auto key() const { return std::tie(head, positive, negative); }
};

class GroundProgram {
public:
    int intern(const GroundAtom& a) {
        auto [it, fresh] = index_.emplace(a, static_cast<int>(atoms_.size()));
        if (fresh) atoms_.push_back(a);
        return it->second;
    }
    std::optional<int> find(const GroundAtom& a) const {
        auto it = index_.find(a);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const GroundAtom& atom(int id) const { return atoms_.at(static_cast<std::size_t>(id)); }
    std::size_t atom_count() const { return atoms_.size(); }
    const std::vector<GroundAtom>& atoms() const { return atoms_; }

    std::vector<GroundRule> rules;

    bool disjunctive() const {
        return std::any_of(rules.begin(), rules.end(), [](const GroundRule& r) { return r.is_disjunctive(); });
    }

    /// Input facts: bodiless single-head rules.
    std::set<GroundAtom> facts() const {
        std::set<GroundAtom> out;
        for (const auto& r : rules) {
            if (r.head.size() == 1 && r.positive.empty() && r.negative.empty()) out.insert(atom(r.head.front()));
        }
        return out;
    }

private:
    std::vector<GroundAtom> atoms_;
    std::map<GroundAtom, int> index_;
};

inline std::string to_string(const GroundRule& r, const GroundProgram& g) {
    std::string out;
    for (std::size_t i = 0; i < r.head.size(); ++i) out += (i ? " v " : "") + to_string(g.atom(r.head[i]));
    std::vector<std::string> body;
    for (int a : r.positive) body.push_back(to_string(g.atom(a)));
    for (int a : r.negative) body.push_back("not " + to_string(g.atom(a)));
    if (!body.empty()) {
        out += r.head.empty() ? ":- " : " :- ";
        for (std::size_t i = 0; i < body.size(); ++i) out += (i ? ", " : "") + body[i];
    }
    return out + ".";
}

inline std::string to_string(const GroundProgram& g) {
    std::string out;
    for (const auto& r : g.rules) out += to_string(r, g) + "\n";
    return out;
}

struct GroundOptions {
    std::size_t max_rules = 200000;
};

namespace detail {

using Subst = std::map<std::string, Value>;

inline std::optional<Value> term_value(const Term& t, const Subst& s) {
    if (!t.is_var()) return t.value();
    auto it = s.find(t.var_name());
    if (it == s.end()) return std::nullopt;
    return it->second;
}

inline GroundAtom instantiate(const ProgramAtom& a, const Subst& s) {
    GroundAtom out{a.predicate, {}, a.annotation};
    for (const auto& t : a.args) out.args.push_back(*term_value(t, s));
    return out;
}

/// Atoms grouped by (predicate, annotation, arity) for joins.
class AtomIndex {
public:
    bool add(const GroundAtom& a) {
        if (!all_.insert(a).second) return false;
        by_key_[key(a.predicate, a.annotation, a.args.size())].push_back(a);
        return true;
    }
    bool contains(const GroundAtom& a) const { return all_.count(a) != 0; }
    const std::vector<GroundAtom>& candidates(const ProgramAtom& p) const {
        static const std::vector<GroundAtom> none;
        auto it = by_key_.find(key(p.predicate, p.annotation, p.args.size()));
        return it == by_key_.end() ? none : it->second;
    }
    const std::set<GroundAtom>& all() const { return all_; }

private:
    static std::tuple<std::string, int, std::size_t> key(const std::string& p, std::optional<Annotation> a,
                                                         std::size_t n) {
        return {p, a ? static_cast<int>(*a) : -1, n};
    }
    std::set<GroundAtom> all_;
    std::map<std::tuple<std::string, int, std::size_t>, std::vector<GroundAtom>> by_key_;
};

/// Enumerates substitutions that match the positive body against `idx`,
/// values restricted to `universe` (when non-empty), builtins checked as soon
/// as their variables are bound.
inline void for_each_match(const ProgramRule& r, const AtomIndex& idx, const std::set<Value>& universe,
                           const std::function<void(const Subst&)>& emit) {
    std::vector<bool> checked(r.builtins.size(), false);
    auto builtins_ok = [&](const Subst& s, std::vector<std::size_t>& newly) {
        for (std::size_t i = 0; i < r.builtins.size(); ++i) {
            if (checked[i]) continue;
            auto l = term_value(r.builtins[i].lhs, s);
            auto rr = term_value(r.builtins[i].rhs, s);
            if (!l || !rr) continue;
            checked[i] = true;
            newly.push_back(i);
            if (!compare(r.builtins[i].op, *l, *rr)) return false;
        }
        return true;
    };
    Subst s;
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        std::vector<std::size_t> newly;
        bool ok = builtins_ok(s, newly);
        if (ok && k == r.positive.size()) emit(s);
        if (ok && k < r.positive.size()) {
            const auto& pat = r.positive[k];
            for (const auto& cand : idx.candidates(pat)) {
                std::vector<std::string> bound;
                bool match = true;
                for (std::size_t i = 0; i < pat.args.size() && match; ++i) {
                    const auto& t = pat.args[i];
                    if (!t.is_var()) {
                        match = t.value() == cand.args[i];
                    } else if (auto it = s.find(t.var_name()); it != s.end()) {
                        match = it->second == cand.args[i];
                    } else if (!universe.empty() && !universe.count(cand.args[i])) {
                        match = false;
                    } else {
                        s.emplace(t.var_name(), cand.args[i]);
                        bound.push_back(t.var_name());
                    }
                }
                if (match) go(k + 1);
                for (const auto& v : bound) s.erase(v);
            }
        }
        for (auto i : newly) checked[i] = false;
    };
    go(0);
}

}  // namespace detail

/// Grounds a safe program. Instantiations range over atoms derivable from the
/// facts when negation is ignored, which over-approximates every stable model;
/// negated atoms outside that set are always false and get dropped.
inline GroundProgram ground(const LogicProgram& p, const std::set<Value>& universe = {},
                            const GroundOptions& opts = {}) {
    for (const auto& r : p.rules) {
        if (auto bad = unsafe_variables(r); !bad.empty()) {
            throw Error(ErrorKind::Evaluation, "unsafe rule: " + to_string(r));
        }
    }
    detail::AtomIndex reach;
    for (bool changed = true; changed;) {
        changed = false;
        std::size_t produced = 0;
        for (const auto& r : p.rules) {
            std::vector<GroundAtom> fresh;
            detail::for_each_match(r, reach, universe, [&](const detail::Subst& s) {
                if (++produced > opts.max_rules) {
                    throw Error(ErrorKind::GroundingTooLarge,
                                "grounding exceeds " + std::to_string(opts.max_rules) + " rule instances");
                }
                for (const auto& h : r.head) {
                    auto a = detail::instantiate(h, s);
                    if (!reach.contains(a)) fresh.push_back(std::move(a));
                }
            });
            for (auto& a : fresh) changed |= reach.add(a);
        }
    }

    GroundProgram g;
    for (const auto& a : reach.all()) g.intern(a);
    std::set<std::tuple<std::vector<int>, std::vector<int>, std::vector<int>>> seen;
    for (const auto& r : p.rules) {
        detail::for_each_match(r, reach, universe, [&](const detail::Subst& s) {
            GroundRule gr;
            gr.kind = r.kind;
            gr.provenance = r.provenance;
            auto ids = [&](const std::vector<ProgramAtom>& atoms, std::vector<int>& out, bool drop_unknown) {
                for (const auto& a : atoms) {
                    auto ga = detail::instantiate(a, s);
                    auto id = g.find(ga);
                    if (!id && drop_unknown) continue;
                    int v = id ? *id : g.intern(ga);
                    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
                }
            };
            ids(r.head, gr.head, false);
            ids(r.positive, gr.positive, false);
            ids(r.negative, gr.negative, true);
            for (int n : gr.negative) {
                if (std::find(gr.positive.begin(), gr.positive.end(), n) != gr.positive.end()) return;
            }
            if (!seen.insert({gr.head, gr.positive, gr.negative}).second) return;
            if (g.rules.size() >= opts.max_rules) {
                throw Error(ErrorKind::GroundingTooLarge,
                            "grounding exceeds " + std::to_string(opts.max_rules) + " ground rules");
            }
            g.rules.push_back(std::move(gr));
        });
    }
    return g;
}

/// Every constant occurring in the program, plus null.
inline std::set<Value> program_constants(const LogicProgram& p) {
    std::set<Value> out{Value::null()};
    auto add = [&](const Term& t) {
        if (!t.is_var()) out.insert(t.value());
    };
    for (const auto& r : p.rules) {
        for (const auto* atoms : {&r.head, &r.positive, &r.negative}) {
            for (const auto& a : *atoms) {
                for (const auto& t : a.args) add(t);
            }
        }
        for (const auto& b : r.builtins) {
            add(b.lhs);
            add(b.rhs);
        }
    }
    return out;
}

struct SolveOptions {
    std::size_t max_nodes = 2000000;  // search-tree nodes before SearchCapExceeded
};

namespace detail {

/// Satisfiability of a small clause set over atom ids (positive literal = id,
/// negative = ~id). Used for the reduct minimality check.
class ClauseSat {
public:
    explicit ClauseSat(std::size_t n) : n_(n) {}
    void add(std::vector<int> clause) { clauses_.push_back(std::move(clause)); }

    bool satisfiable(std::vector<int8_t> val) const { return search(val); }

private:
    static int var(int lit) { return lit >= 0 ? lit : ~lit; }
    static bool sign(int lit) { return lit >= 0; }

    bool propagate(std::vector<int8_t>& val) const {
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& c : clauses_) {
                int unknown = -1, n_unknown = 0;
                bool sat = false;
                for (int lit : c) {
                    auto v = val[static_cast<std::size_t>(var(lit))];
                    if (v < 0) {
                        ++n_unknown;
                        unknown = lit;
                    } else if ((v == 1) == sign(lit)) {
                        sat = true;
                        break;
                    }
                }
                if (sat) continue;
                if (n_unknown == 0) return false;
                if (n_unknown == 1) {
                    val[static_cast<std::size_t>(var(unknown))] = sign(unknown) ? 1 : 0;
                    changed = true;
                }
            }
        }
        return true;
    }

    bool search(std::vector<int8_t>& val) const {
        if (!propagate(val)) return false;
        auto it = std::find(val.begin(), val.end(), int8_t{-1});
        if (it == val.end()) return true;
        for (int8_t choice : {int8_t{0}, int8_t{1}}) {
            auto copy = val;
            copy[static_cast<std::size_t>(it - val.begin())] = choice;
            if (search(copy)) return true;
        }
        return false;
    }

    std::size_t n_;
    std::vector<std::vector<int>> clauses_;
};

}  // namespace detail

/// M is a model of every rule and denial of g.
inline bool is_model(const GroundProgram& g, const std::set<int>& m) {
    for (const auto& r : g.rules) {
        bool body = std::all_of(r.positive.begin(), r.positive.end(), [&](int a) { return m.count(a); }) &&
                    std::none_of(r.negative.begin(), r.negative.end(), [&](int a) { return m.count(a); });
        if (body && std::none_of(r.head.begin(), r.head.end(), [&](int a) { return m.count(a); })) return false;
    }
    return true;
}

/// The Gelfond-Lifschitz reduct of g by m: rules with a negated atom in m are
/// deleted, the remaining negative literals dropped.
inline GroundProgram reduct(const GroundProgram& g, const std::set<int>& m) {
    GroundProgram out = g;
    out.rules.clear();
    for (const auto& r : g.rules) {
        if (std::any_of(r.negative.begin(), r.negative.end(), [&](int a) { return m.count(a); })) continue;
        auto copy = r;
        copy.negative.clear();
        out.rules.push_back(std::move(copy));
    }
    return out;
}

/// True iff m is a minimal model of the reduct of g by m (denials only
/// filter, they do not take part in minimality).
inline bool is_stable(const GroundProgram& g, const std::set<int>& m) {
    if (!is_model(g, m)) return false;
    std::vector<int> ids(m.begin(), m.end());
    std::map<int, int> local;
    for (std::size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> clauses;
    bool horn = true;
    for (const auto& r : g.rules) {
        if (r.is_denial()) continue;
        if (std::any_of(r.negative.begin(), r.negative.end(), [&](int a) { return m.count(a); })) continue;
        if (!std::all_of(r.positive.begin(), r.positive.end(), [&](int a) { return m.count(a); })) continue;
        std::vector<int> c;
        for (int a : r.positive) c.push_back(~local.at(a));
        int heads = 0;
        for (int a : r.head) {
            if (m.count(a)) {
                c.push_back(local.at(a));
                ++heads;
            }
        }
        horn = horn && heads <= 1;
        clauses.push_back(std::move(c));
    }
    if (horn) {
        // least model of the definite part must be all of m
        std::vector<bool> in(ids.size(), false);
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& c : clauses) {
                int head = -1;
                bool body = true;
                for (int lit : c) {
                    if (lit >= 0) head = lit;
                    else body = body && in[static_cast<std::size_t>(~lit)];
                }
                if (body && head >= 0 && !in[static_cast<std::size_t>(head)]) {
                    in[static_cast<std::size_t>(head)] = true;
                    changed = true;
                }
            }
        }
        return std::all_of(in.begin(), in.end(), [](bool b) { return b; });
    }
    detail::ClauseSat sat(ids.size());
    for (auto& c : clauses) sat.add(std::move(c));
    std::vector<int> smaller;
    for (std::size_t i = 0; i < ids.size(); ++i) smaller.push_back(~static_cast<int>(i));
    sat.add(smaller);
    return !sat.satisfiable(std::vector<int8_t>(ids.size(), -1));
}

namespace detail {

/// Branch-and-propagate enumeration of stable models: candidates must be
/// classical models in which every true atom is supported; survivors are
/// checked against the reduct.
class StableSearch {
public:
    StableSearch(const GroundProgram& g, const SolveOptions& opts) : g_(g), opts_(opts), head_rules_(g.atom_count()) {
        for (std::size_t i = 0; i < g.rules.size(); ++i) {
            for (int h : g.rules[i].head) head_rules_[static_cast<std::size_t>(h)].push_back(i);
        }
    }

    std::vector<std::set<int>> run() {
        std::vector<int8_t> val(g_.atom_count(), -1);
        search(val);
        return std::move(found_);
    }

private:
    int8_t at(const std::vector<int8_t>& v, int a) const { return v[static_cast<std::size_t>(a)]; }

    // 1 = body true, 0 = body false, -1 = undecided
    int8_t body_state(const GroundRule& r, const std::vector<int8_t>& v) const {
        bool unknown = false;
        for (int a : r.positive) {
            if (at(v, a) == 0) return 0;
            unknown |= at(v, a) < 0;
        }
        for (int a : r.negative) {
            if (at(v, a) == 1) return 0;
            unknown |= at(v, a) < 0;
        }
        return unknown ? -1 : 1;
    }

    bool set(std::vector<int8_t>& v, int a, int8_t b, bool& changed) const {
        auto& slot = v[static_cast<std::size_t>(a)];
        if (slot == b) return true;
        if (slot >= 0) return false;
        slot = b;
        changed = true;
        return true;
    }

    bool propagate(std::vector<int8_t>& v) const {
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& r : g_.rules) {
                auto body = body_state(r, v);
                if (body == 0) continue;
                int n_unknown_head = 0, unknown_head = -1;
                bool head_true = false;
                for (int h : r.head) {
                    if (at(v, h) == 1) head_true = true;
                    if (at(v, h) < 0) {
                        ++n_unknown_head;
                        unknown_head = h;
                    }
                }
                if (head_true) continue;
                if (body == 1) {
                    if (n_unknown_head == 0) return false;
                    if (n_unknown_head == 1 && !set(v, unknown_head, 1, changed)) return false;
                } else if (n_unknown_head == 0) {
                    // all heads false: the single open body literal must fail
                    int open = 0, lit = 0;
                    bool positive = true;
                    for (int a : r.positive) {
                        if (at(v, a) < 0) ++open, lit = a, positive = true;
                    }
                    for (int a : r.negative) {
                        if (at(v, a) < 0) ++open, lit = a, positive = false;
                    }
                    if (open == 1 && !set(v, lit, positive ? 0 : 1, changed)) return false;
                }
            }
            for (std::size_t a = 0; a < v.size(); ++a) {
                if (v[a] == 0) continue;
                std::size_t supporters = 0, last = 0;
                for (auto ri : head_rules_[a]) {
                    const auto& r = g_.rules[ri];
                    if (body_state(r, v) == 0) continue;
                    bool other_true = false;
                    for (int h : r.head) other_true |= static_cast<std::size_t>(h) != a && at(v, h) == 1;
                    if (other_true) continue;
                    ++supporters;
                    last = ri;
                }
                if (supporters == 0) {
                    if (v[a] == 1) return false;
                    v[a] = 0;
                    changed = true;
                } else if (supporters == 1 && v[a] == 1) {
                    const auto& r = g_.rules[last];
                    for (int p : r.positive) {
                        if (!set(v, p, 1, changed)) return false;
                    }
                    for (int n : r.negative) {
                        if (!set(v, n, 0, changed)) return false;
                    }
                    for (int h : r.head) {
                        if (static_cast<std::size_t>(h) != a && !set(v, h, 0, changed)) return false;
                    }
                }
            }
        }
        return true;
    }

    void search(std::vector<int8_t>& v) {
        if (++nodes_ > opts_.max_nodes) {
            throw Error(ErrorKind::SearchCapExceeded,
                        "stable model search exceeds " + std::to_string(opts_.max_nodes) + " nodes");
        }
        if (!propagate(v)) return;
        auto it = std::find(v.begin(), v.end(), int8_t{-1});
        if (it == v.end()) {
            std::set<int> m;
            for (std::size_t a = 0; a < v.size(); ++a) {
                if (v[a] == 1) m.insert(static_cast<int>(a));
            }
            if (is_stable(g_, m)) found_.push_back(std::move(m));
            return;
        }
        for (int8_t choice : {int8_t{1}, int8_t{0}}) {
            auto copy = v;
            copy[static_cast<std::size_t>(it - v.begin())] = choice;
            search(copy);
        }
    }

    const GroundProgram& g_;
    SolveOptions opts_;
    std::vector<std::vector<std::size_t>> head_rules_;
    std::vector<std::set<int>> found_;
    std::size_t nodes_ = 0;
};

}  // namespace detail

/// All stable models of g, each in canonical atom order, the list sorted.
inline std::vector<StableModel> stable_models(const GroundProgram& g, const SolveOptions& opts = {}) {
    std::vector<StableModel> out;
    for (const auto& m : detail::StableSearch(g, opts).run()) {
        StableModel sm;
        for (int a : m) sm.insert(g.atom(a));
        out.push_back(std::move(sm));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct HcfResult {
    bool hcf = true;
    std::optional<std::size_t> rule;  // offending rule index
    std::vector<int> cycle;           // atom ids, first repeated implicitly at the end
};

/// Head-cycle-freeness on the ground dependency graph (edge from each
/// positive body atom to each head atom of the same rule).
inline HcfResult is_hcf(const GroundProgram& g) {
    const std::size_t n = g.atom_count();
    std::vector<std::vector<int>> adj(n);
    for (const auto& r : g.rules) {
        for (int p : r.positive) {
            for (int h : r.head) adj[static_cast<std::size_t>(p)].push_back(h);
        }
    }
    // Tarjan, iterative
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0, comps = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        std::vector<std::pair<std::size_t, std::size_t>> work{{s, 0}};
        index[s] = low[s] = counter++;
        stack.push_back(static_cast<int>(s));
        on_stack[s] = true;
        while (!work.empty()) {
            auto& [v, i] = work.back();
            if (i < adj[v].size()) {
                auto w = static_cast<std::size_t>(adj[v][i++]);
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(static_cast<int>(w));
                    on_stack[w] = true;
                    work.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                for (;;) {
                    auto w = static_cast<std::size_t>(stack.back());
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = comps;
                    if (w == v) break;
                }
                ++comps;
            }
            auto done = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
        }
    }
    auto path = [&](int from, int to) {
        // BFS inside from's component
        std::map<int, int> parent{{from, from}};
        std::vector<int> queue{from};
        for (std::size_t q = 0; q < queue.size(); ++q) {
            int v = queue[q];
            if (v == to) break;
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (comp[static_cast<std::size_t>(w)] != comp[static_cast<std::size_t>(from)] || parent.count(w)) continue;
                parent[w] = v;
                queue.push_back(w);
            }
        }
        std::vector<int> out;
        for (int v = to; v != from; v = parent.at(v)) out.push_back(v);
        out.push_back(from);
        std::reverse(out.begin(), out.end());
        return out;
    };
    for (std::size_t ri = 0; ri < g.rules.size(); ++ri) {
        const auto& h = g.rules[ri].head;
        for (std::size_t i = 0; i < h.size(); ++i) {
            for (std::size_t j = i + 1; j < h.size(); ++j) {
                if (comp[static_cast<std::size_t>(h[i])] != comp[static_cast<std::size_t>(h[j])]) continue;
                HcfResult res{false, ri, path(h[i], h[j])};
                auto back = path(h[j], h[i]);
                res.cycle.insert(res.cycle.end(), back.begin() + 1, back.end() - 1);
                return res;
            }
        }
    }
    return {};
}

/// Replaces each disjunctive rule by one rule per head atom, negating the
/// other head atoms. Throws NotHCF when the program has a head cycle.
inline GroundProgram shift(const GroundProgram& g) {
    if (auto h = is_hcf(g); !h.hcf) {
        std::string cycle;
        for (int a : h.cycle) cycle += to_string(g.atom(a)) + " -> ";
        cycle += to_string(g.atom(h.cycle.front()));
        throw Error(ErrorKind::NotHCF, "rule " + to_string(g.rules[*h.rule], g) + " has a head cycle: " + cycle);
    }
    GroundProgram out = g;
    out.rules.clear();
    for (const auto& r : g.rules) {
        if (!r.is_disjunctive()) {
            out.rules.push_back(r);
            continue;
        }
        for (int h : r.head) {
            GroundRule s = r;
            s.head = {h};
            for (int o : r.head) {
                if (o != h) s.negative.push_back(o);
            }
            out.rules.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace nullcqa

#endif  // NULLCQA_SOLVER_HPP
