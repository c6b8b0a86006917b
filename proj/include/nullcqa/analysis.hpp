#ifndef NULLCQA_ANALYSIS_HPP
#define NULLCQA_ANALYSIS_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nullcqa/constraint.hpp"

namespace nullcqa {

/// Attribute position R[i], 1-based.
struct Position {
    std::string predicate;
    std::size_t index = 0;

    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position&, const Position&) = default;
};

inline std::string to_string(const Position& p) { return p.predicate + "[" + std::to_string(p.index) + "]"; }

using AttributeSet = std::set<Position>;

inline std::string to_string(const AttributeSet& a) {
    std::string out = "{";
    bool first = true;
    for (const auto& p : a) {
        if (!first) out += ", ";
        first = false;
        out += to_string(p);
    }
    return out + "}";
}

/// Relevant attributes: every position holding a variable that occurs at
/// least twice in the constraint (builtin occurrences and repeats inside one
/// atom both count), plus every position holding a constant. Constants that
/// occur only in builtins occupy no position and contribute nothing.
inline AttributeSet relevant_attributes(const Constraint& c) {
    std::map<std::string, std::size_t> occurrences;
    auto count = [&](const Term& t) {
        if (t.is_var()) ++occurrences[t.var_name()];
    };
    for (const auto& a : c.antecedent) std::for_each(a.terms.begin(), a.terms.end(), count);
    for (const auto& a : c.consequent) std::for_each(a.terms.begin(), a.terms.end(), count);
    for (const auto& b : c.builtins) {
        count(b.lhs);
        count(b.rhs);
    }
    AttributeSet out;
    auto collect = [&](const DbAtom& a) {
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            const auto& t = a.terms[i];
            if (!t.is_var() || occurrences[t.var_name()] >= 2) out.insert(Position{a.predicate, i + 1});
        }
    };
    std::for_each(c.antecedent.begin(), c.antecedent.end(), collect);
    std::for_each(c.consequent.begin(), c.consequent.end(), collect);
    return out;
}

/// Predicate dependency graph. In the plain graph every vertex is a single
/// predicate; in the contracted graph a vertex may stand for several.
struct DependencyGraph {
    struct Edge {
        std::size_t from = 0;
        std::size_t to = 0;
        std::string label;

        friend bool operator==(const Edge&, const Edge&) = default;
        friend auto operator<=>(const Edge&, const Edge&) = default;
    };

    std::vector<std::set<std::string>> vertices;
    std::vector<Edge> edges;

    std::optional<std::size_t> vertex_of(const std::string& predicate) const {
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (vertices[i].count(predicate)) return i;
        }
        return std::nullopt;
    }

    std::string vertex_name(std::size_t v) const {
        const auto& members = vertices[v];
        if (members.size() == 1) return *members.begin();
        std::string out = "{";
        bool first = true;
        for (const auto& m : members) {
            if (!first) out += ",";
            first = false;
            out += m;
        }
        return out + "}";
    }
};

namespace detail {

inline std::set<std::string> ic_predicates(const ConstraintSet& ic) {
    std::set<std::string> out;
    for (const auto& c : ic) out.merge(c.predicates());
    return out;
}

inline void add_constraint_edges(DependencyGraph& g, const Constraint& c) {
    for (const auto& a : c.antecedent) {
        for (const auto& q : c.consequent) {
            g.edges.push_back({*g.vertex_of(a.predicate), *g.vertex_of(q.predicate), c.label});
        }
    }
}

inline void canonicalize(DependencyGraph& g) {
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
}

}  // namespace detail

/// One vertex per predicate mentioned in IC; an edge P -> Q labelled with the
/// constraint whenever P is in its antecedent and Q in its consequent.
inline DependencyGraph dependency_graph(const ConstraintSet& ic) {
    DependencyGraph g;
    for (const auto& p : detail::ic_predicates(ic)) g.vertices.push_back({p});
    for (const auto& c : ic) detail::add_constraint_edges(g, c);
    detail::canonicalize(g);
    return g;
}

/// Merges each weakly connected component of the UIC-only graph into one
/// vertex and keeps only the edges of the non-universal constraints.
inline DependencyGraph contracted_graph(const ConstraintSet& ic) {
    auto preds = detail::ic_predicates(ic);
    std::vector<std::string> names(preds.begin(), preds.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;

    std::vector<std::size_t> parent(names.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto* c : ic.uics()) {
        for (const auto& a : c->antecedent) {
            for (const auto& q : c->consequent) parent[find(index[a.predicate])] = find(index[q.predicate]);
        }
    }
    std::map<std::size_t, std::set<std::string>> groups;
    for (std::size_t i = 0; i < names.size(); ++i) groups[find(i)].insert(names[i]);

    DependencyGraph g;
    for (auto& [root, members] : groups) g.vertices.push_back(std::move(members));
    std::sort(g.vertices.begin(), g.vertices.end());
    for (const auto& c : ic) {
        if (c.kind != ConstraintKind::UIC) detail::add_constraint_edges(g, c);
    }
    detail::canonicalize(g);
    return g;
}

struct CycleWitness {
    std::vector<std::size_t> vertices;  // v0 -> v1 -> ... -> v0
    std::vector<std::string> labels;    // edge labels along the cycle
};

/// Directed cycle search by iterative DFS; a self-loop is a cycle of length 1.
inline std::optional<CycleWitness> find_cycle(const DependencyGraph& g) {
    const std::size_t n = g.vertices.size();
    std::vector<std::vector<const DependencyGraph::Edge*>> out(n);
    for (const auto& e : g.edges) out[e.from].push_back(&e);

    enum class Color { White, Grey, Black };
    std::vector<Color> color(n, Color::White);
    std::vector<const DependencyGraph::Edge*> via(n, nullptr);

    for (std::size_t root = 0; root < n; ++root) {
        if (color[root] != Color::White) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        color[root] = Color::Grey;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next == out[v].size()) {
                color[v] = Color::Black;
                stack.pop_back();
                continue;
            }
            const auto* e = out[v][next++];
            if (color[e->to] == Color::Grey) {
                CycleWitness w;
                std::vector<const DependencyGraph::Edge*> path{e};
                for (std::size_t u = v; u != e->to; u = via[u]->from) path.push_back(via[u]);
                std::reverse(path.begin(), path.end());
                for (const auto* pe : path) {
                    w.vertices.push_back(pe->from);
                    w.labels.push_back(pe->label);
                }
                return w;
            }
            if (color[e->to] == Color::White) {
                color[e->to] = Color::Grey;
                via[e->to] = e;
                stack.emplace_back(e->to, 0);
            }
        }
    }
    return std::nullopt;
}

struct AcyclicityResult {
    bool acyclic = true;
    DependencyGraph contracted;
    std::optional<CycleWitness> cycle;
};

inline AcyclicityResult is_ric_acyclic(const ConstraintSet& ic) {
    AcyclicityResult r;
    r.contracted = contracted_graph(ic);
    r.cycle = find_cycle(r.contracted);
    r.acyclic = !r.cycle.has_value();
    return r;
}

struct Conflict {
    std::string nnc;
    std::string referential;
    Position position;

    friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// An NNC conflicts with a constraint that existentially quantifies the very
/// position it guards.
inline std::vector<Conflict> conflicts(const ConstraintSet& ic) {
    std::vector<Conflict> out;
    for (const auto* nnc : ic.nncs()) {
        Position guarded{nnc->antecedent.front().predicate, nnc->nnc_position()};
        for (const auto& c : ic) {
            for (const auto& q : c.consequent) {
                if (q.predicate != guarded.predicate) continue;
                const auto& t = q.terms[guarded.index - 1];
                if (t.is_var() && c.is_existential(t.var_name())) out.push_back({nnc->label, c.label, guarded});
            }
        }
    }
    return out;
}

inline bool non_conflicting(const ConstraintSet& ic) { return conflicts(ic).empty(); }

/// Predicates occurring in some antecedent and some consequent.
inline std::set<std::string> bilateral_predicates(const ConstraintSet& ic) {
    std::set<std::string> lhs, rhs, out;
    for (const auto& c : ic) {
        for (const auto& a : c.antecedent) lhs.insert(a.predicate);
        for (const auto& a : c.consequent) rhs.insert(a.predicate);
    }
    std::set_intersection(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(), std::inserter(out, out.end()));
    return out;
}

/// Sufficient syntactic condition for a head-cycle-free repair program:
/// every constraint mentions bilateral predicates at most once in total.
/// A false result is inconclusive.
inline bool hcf_sufficient(const ConstraintSet& ic) {
    auto bilateral = bilateral_predicates(ic);
    for (const auto& c : ic) {
        std::size_t hits = 0;
        for (const auto* atoms : {&c.antecedent, &c.consequent}) {
            for (const auto& a : *atoms) hits += bilateral.count(a.predicate);
        }
        if (hits > 1) return false;
    }
    return true;
}

inline std::string to_dot(const DependencyGraph& g, const std::string& name = "G") {
    std::string out = "digraph " + name + " {\n";
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        out += "  v" + std::to_string(v) + " [label=\"" + g.vertex_name(v) + "\"];\n";
    }
    for (const auto& e : g.edges) {
        out += "  v" + std::to_string(e.from) + " -> v" + std::to_string(e.to) + " [label=\"" + e.label + "\"];\n";
    }
    return out + "}\n";
}

}  // namespace nullcqa

#endif  // NULLCQA_ANALYSIS_HPP
