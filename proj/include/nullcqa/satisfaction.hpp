#ifndef NULLCQA_SATISFACTION_HPP
#define NULLCQA_SATISFACTION_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nullcqa/analysis.hpp"
#include "nullcqa/constraint.hpp"
#include "nullcqa/relational.hpp"

namespace nullcqa {

/// The constraint restricted to its relevant attributes, with IsNull guards
/// over every antecedent variable that survives the projection:
///
///   forall x. /\ P_i^A(x_i) -> \/ IsNull(v_j) | exists z. \/ Q_j^A(y_j, z_j) | phi
struct TransformedConstraint {
    std::string label;
    AttributeSet relevant;
    std::vector<DbAtom> antecedent;
    std::vector<std::string> guards;
    std::vector<DbAtom> consequent;
    std::vector<std::string> existentials;
    std::vector<BuiltinAtom> builtins;
};

inline std::string to_string(const TransformedConstraint& t) {
    auto atom = [](const DbAtom& a) {
        std::string out = a.predicate + "^A(";
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            if (i) out += ",";
            out += to_string(a.terms[i]);
        }
        return out + ")";
    };
    std::string out;
    for (std::size_t i = 0; i < t.antecedent.size(); ++i) {
        if (i) out += " & ";
        out += atom(t.antecedent[i]);
    }
    out += " -> ";
    std::vector<std::string> disjuncts;
    for (const auto& g : t.guards) disjuncts.push_back("IsNull(" + g + ")");
    std::string ex;
    if (!t.existentials.empty()) {
        ex = "exists ";
        for (std::size_t i = 0; i < t.existentials.size(); ++i) ex += (i ? "," : "") + t.existentials[i];
        ex += ": ";
    }
    for (std::size_t i = 0; i < t.consequent.size(); ++i) disjuncts.push_back((i == 0 ? ex : "") + atom(t.consequent[i]));
    for (const auto& b : t.builtins) disjuncts.push_back(to_string(b));
    if (disjuncts.empty()) disjuncts.push_back("false");
    for (std::size_t i = 0; i < disjuncts.size(); ++i) out += (i ? " | " : "") + disjuncts[i];
    return out;
}

namespace detail {

inline DbAtom project_atom(const DbAtom& a, const AttributeSet& attrs) {
    DbAtom out{a.predicate, {}};
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (attrs.count(Position{a.predicate, i + 1})) out.terms.push_back(a.terms[i]);
    }
    return out;
}

}  // namespace detail

/// Builds the null-aware form of a non-NNC constraint.
inline TransformedConstraint transform(const Constraint& c) {
    if (c.kind == ConstraintKind::NNC) {
        throw Error(ErrorKind::InvalidConstraint, "NOT NULL constraints are checked classically, not transformed");
    }
    TransformedConstraint t;
    t.label = c.label;
    t.relevant = relevant_attributes(c);
    t.builtins = c.builtins;
    for (const auto& a : c.antecedent) {
        t.antecedent.push_back(detail::project_atom(a, t.relevant));
        for (const auto& term : t.antecedent.back().terms) {
            if (term.is_var() && std::find(t.guards.begin(), t.guards.end(), term.var_name()) == t.guards.end()) {
                t.guards.push_back(term.var_name());
            }
        }
    }
    for (const auto& a : c.consequent) {
        t.consequent.push_back(detail::project_atom(a, t.relevant));
        for (const auto& term : t.consequent.back().terms) {
            if (term.is_var() && c.is_existential(term.var_name()) &&
                std::find(t.existentials.begin(), t.existentials.end(), term.var_name()) == t.existentials.end()) {
                t.existentials.push_back(term.var_name());
            }
        }
    }
    return t;
}

/// D projected onto an attribute set. Predicates without any selected
/// position become zero-arity relations holding the empty tuple iff the
/// predicate is non-empty in D.
struct ProjectedInstance {
    std::map<std::string, std::set<std::vector<Value>>> relations;

    const std::set<std::vector<Value>>& tuples(const std::string& predicate) const {
        static const std::set<std::vector<Value>> empty;
        auto it = relations.find(predicate);
        return it == relations.end() ? empty : it->second;
    }

    friend bool operator==(const ProjectedInstance&, const ProjectedInstance&) = default;
};

inline ProjectedInstance project(const Instance& d, const AttributeSet& attrs) {
    ProjectedInstance out;
    for (const auto& a : d) {
        std::vector<Value> row;
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (attrs.count(Position{a.predicate, i + 1})) row.push_back(a.args[i]);
        }
        out.relations[a.predicate].insert(std::move(row));
    }
    return out;
}

using Valuation = std::vector<std::pair<std::string, Value>>;

inline std::string to_string(const Valuation& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += v[i].first + "=" + to_string(v[i].second);
    }
    return out + "}";
}

namespace detail {

using Binding = std::map<std::string, Value>;

inline bool unify_row(const DbAtom& a, const std::vector<Value>& row, Binding& b, std::vector<std::string>& bound) {
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        const auto& t = a.terms[i];
        if (!t.is_var()) {
            if (t.value() != row[i]) return false;
            continue;
        }
        auto it = b.find(t.var_name());
        if (it != b.end()) {
            if (it->second != row[i]) return false;
        } else {
            b.emplace(t.var_name(), row[i]);
            bound.push_back(t.var_name());
        }
    }
    return true;
}

inline Value eval_term(const Term& t, const Binding& b) { return t.is_var() ? b.at(t.var_name()) : t.value(); }

/// Evaluates the transformed constraint by nested-loop join; calls `on_violation`
/// for each antecedent valuation that falsifies it. Stops early when the
/// callback returns false.
template <class F>
void for_each_violation(const TransformedConstraint& t, const ProjectedInstance& p, F&& on_violation) {
    Binding binding;
    bool stop = false;

    auto consequent_holds = [&]() {
        for (const auto& g : t.guards) {
            if (binding.at(g).is_null()) return true;
        }
        for (const auto& b : t.builtins) {
            if (compare(b.op, eval_term(b.lhs, binding), eval_term(b.rhs, binding))) return true;
        }
        for (const auto& q : t.consequent) {
            for (const auto& row : p.tuples(q.predicate)) {
                Binding local = binding;
                std::vector<std::string> bound;
                if (unify_row(q, row, local, bound)) return true;
            }
        }
        return false;
    };

    auto join = [&](auto& self, std::size_t k) -> void {
        if (stop) return;
        if (k == t.antecedent.size()) {
            if (!consequent_holds() && !on_violation(binding)) stop = true;
            return;
        }
        const auto& atom = t.antecedent[k];
        for (const auto& row : p.tuples(atom.predicate)) {
            std::vector<std::string> bound;
            if (unify_row(atom, row, binding, bound)) self(self, k + 1);
            for (const auto& v : bound) binding.erase(v);
            if (stop) return;
        }
    };
    join(join, 0);
}

}  // namespace detail

struct ConstraintReport {
    std::string label;
    ConstraintKind kind = ConstraintKind::General;
    std::string text;
    bool satisfied = true;
    std::vector<Valuation> violations;  // antecedent valuations (transformed variables)
    std::vector<Atom> null_witnesses;   // NNC: atoms with null in the guarded position
};

/// Null-aware satisfaction of a constraint of the general, universal or
/// referential form. Null behaves as an ordinary constant except that a null
/// in a relevant antecedent position discharges the valuation.
inline ConstraintReport satisfies(const Instance& d, const Constraint& c, bool stop_at_first = false) {
    auto t = transform(c);
    auto p = project(d, t.relevant);
    ConstraintReport r{c.label, c.kind, to_string(c), true, {}, {}};
    auto order = c.universal_vars();
    std::set<Valuation> seen;
    detail::for_each_violation(t, p, [&](const detail::Binding& b) {
        Valuation v;
        for (const auto& name : order) {
            auto it = b.find(name);
            if (it != b.end()) v.emplace_back(name, it->second);
        }
        if (seen.insert(v).second) r.violations.push_back(std::move(v));
        return !stop_at_first;
    });
    r.satisfied = r.violations.empty();
    return r;
}

/// NOT NULL constraints are checked classically.
inline ConstraintReport satisfies_nnc(const Instance& d, const Constraint& c) {
    if (c.kind != ConstraintKind::NNC) throw Error(ErrorKind::InvalidConstraint, c.label + " is not a NOT NULL constraint");
    ConstraintReport r{c.label, c.kind, to_string(c), true, {}, {}};
    const auto& pattern = c.antecedent.front();
    auto pos = c.nnc_position();
    for (const auto& a : d.atoms_of(pattern.predicate)) {
        if (!a.args[pos - 1].is_null()) continue;
        detail::Binding b;
        std::vector<std::string> bound;
        if (detail::unify_row(pattern, a.args, b, bound)) r.null_witnesses.push_back(a);
    }
    r.satisfied = r.null_witnesses.empty();
    return r;
}

inline ConstraintReport check_constraint(const Instance& d, const Constraint& c, bool stop_at_first = false) {
    return c.kind == ConstraintKind::NNC ? satisfies_nnc(d, c) : satisfies(d, c, stop_at_first);
}

struct SatisfactionReport {
    bool satisfied = true;
    std::vector<ConstraintReport> constraints;

    std::vector<const ConstraintReport*> violated() const {
        std::vector<const ConstraintReport*> out;
        for (const auto& r : constraints) {
            if (!r.satisfied) out.push_back(&r);
        }
        return out;
    }
};

inline SatisfactionReport satisfies_all(const Instance& d, const ConstraintSet& ic) {
    SatisfactionReport out;
    for (const auto& c : ic) {
        out.constraints.push_back(check_constraint(d, c));
        out.satisfied = out.satisfied && out.constraints.back().satisfied;
    }
    return out;
}

/// Precomputes transforms so many instances can be checked cheaply.
class ConsistencyChecker {
public:
    explicit ConsistencyChecker(const ConstraintSet& ic) : ic_(&ic) {
        for (const auto& c : ic) {
            if (c.kind != ConstraintKind::NNC) transformed_.emplace_back(&c, transform(c));
        }
    }

    bool consistent(const Instance& d) const {
        for (const auto* nnc : ic_->nncs()) {
            if (!satisfies_nnc(d, *nnc).satisfied) return false;
        }
        for (const auto& [c, t] : transformed_) {
            auto p = project(d, t.relevant);
            bool violated = false;
            detail::for_each_violation(t, p, [&](const auto&) {
                violated = true;
                return false;
            });
            if (violated) return false;
        }
        return true;
    }

private:
    const ConstraintSet* ic_;
    std::vector<std::pair<const Constraint*, TransformedConstraint>> transformed_;
};

}  // namespace nullcqa

#endif  // NULLCQA_SATISFACTION_HPP
