#ifndef NULLCQA_TESTS_SUPPORT_HPP
#define NULLCQA_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nullcqa/nullcqa.hpp"

namespace testing_support {

using namespace nullcqa;

struct RandomSpec {
    std::size_t max_predicates = 2;
    std::size_t max_arity = 2;
    std::size_t max_atoms = 4;
    std::size_t max_constraints = 2;
    std::vector<std::string> constants{"a", "b", "c"};
    bool nulls = true;
    bool builtins = true;
};

struct Sig {
    std::string name;
    std::size_t arity;
};

inline std::size_t pick(std::mt19937& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline std::vector<Sig> random_signature(std::mt19937& rng, const RandomSpec& spec) {
    static const char* names[] = {"P", "Q", "R", "S"};
    std::vector<Sig> out;
    // two predicates most of the time: referential constraints need a target
    std::size_t n = spec.max_predicates > 1 && pick(rng, 4) != 0 ? spec.max_predicates : 1 + pick(rng, spec.max_predicates);
    for (std::size_t i = 0; i < n; ++i) out.push_back({names[i], 1 + pick(rng, spec.max_arity)});
    return out;
}

inline std::string atom_text(const Sig& s, const std::vector<std::string>& args) {
    std::string out = s.name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i];
    return out + ")";
}

/// One constraint in the input grammar; may be rejected later by the parser
/// or by the form filters, callers retry.
inline std::string random_constraint(std::mt19937& rng, const std::vector<Sig>& sig, const RandomSpec& spec) {
    static const std::vector<std::string> vars{"x", "y", "z"};
    auto fresh_vars = [&](std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(vars[pick(rng, vars.size())]);
        return out;
    };
    auto kind = pick(rng, 5);
    switch (kind < 2 ? 0 : kind < 4 ? 1 : 2) {
        case 0: {  // universal
            std::vector<std::string> used;
            std::string ante;
            std::size_t n = 1 + pick(rng, 2);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& s = sig[pick(rng, sig.size())];
                auto args = fresh_vars(s.arity);
                used.insert(used.end(), args.begin(), args.end());
                ante += (i ? ", " : "") + atom_text(s, args);
            }
            std::vector<std::string> disjuncts;
            if (pick(rng, 3) != 0) {
                const auto& s = sig[pick(rng, sig.size())];
                std::vector<std::string> args;
                for (std::size_t i = 0; i < s.arity; ++i) {
                    args.push_back(pick(rng, 5) == 0 ? "\"" + spec.constants[pick(rng, spec.constants.size())] + "\""
                                                     : used[pick(rng, used.size())]);
                }
                disjuncts.push_back(atom_text(s, args));
            }
            if (spec.builtins && pick(rng, 3) == 0) {
                disjuncts.push_back(used[pick(rng, used.size())] + (pick(rng, 2) ? " = " : " != ") +
                                    used[pick(rng, used.size())]);
            }
            std::string cons;
            for (std::size_t i = 0; i < disjuncts.size(); ++i) cons += (i ? " | " : "") + disjuncts[i];
            return ante + " -> " + (cons.empty() ? "false" : cons) + ".";
        }
        case 1: {  // referential
            std::size_t f = pick(rng, sig.size());
            std::size_t t = sig.size() > 1 ? (f + 1 + pick(rng, sig.size() - 1)) % sig.size() : f;
            const auto& from = sig[f];
            const auto& to = sig[t];
            std::vector<std::string> xs;
            for (std::size_t i = 0; i < from.arity; ++i) xs.push_back("x" + std::to_string(i + 1));
            std::vector<std::string> args, ex;
            for (std::size_t i = 0; i < to.arity; ++i) {
                bool existential = pick(rng, 2) == 0 || i + 1 == to.arity;
                if (existential) {
                    ex.push_back("w" + std::to_string(i + 1));
                    args.push_back(ex.back());
                } else {
                    args.push_back(xs[std::min(i, xs.size() - 1)]);
                }
            }
            std::string exists = "exists ";
            for (std::size_t i = 0; i < ex.size(); ++i) exists += (i ? ", " : "") + ex[i];
            return atom_text(from, xs) + " -> " + exists + ": " + atom_text(to, args) + ".";
        }
        default: {  // not null
            const auto& s = sig[pick(rng, sig.size())];
            std::vector<std::string> xs;
            for (std::size_t i = 0; i < s.arity; ++i) xs.push_back("x" + std::to_string(i + 1));
            return atom_text(s, xs) + ", isnull(" + xs[pick(rng, xs.size())] + ") -> false.";
        }
    }
}

/// A non-conflicting, RIC-acyclic set of UICs, RICs and NNCs.
inline ConstraintSet random_constraints(std::mt19937& rng, const std::vector<Sig>& sig, const RandomSpec& spec) {
    for (;;) {
        std::string text;
        std::size_t n = 1 + pick(rng, spec.max_constraints);
        for (std::size_t i = 0; i < n; ++i) text += random_constraint(rng, sig, spec) + "\n";
        try {
            auto ic = parse_constraints(text);
            bool ok = non_conflicting(ic) && is_ric_acyclic(ic).acyclic;
            for (const auto& c : ic) ok = ok && c.kind != ConstraintKind::General;
            if (ok) return ic;
        } catch (const Error&) {
        }
    }
}

inline Instance random_instance(std::mt19937& rng, const std::vector<Sig>& sig, const RandomSpec& spec) {
    Instance d;
    std::size_t n = pick(rng, spec.max_atoms + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = sig[pick(rng, sig.size())];
        Atom a{s.name, {}};
        for (std::size_t k = 0; k < s.arity; ++k) {
            std::size_t choice = pick(rng, spec.constants.size() + (spec.nulls ? 1 : 0));
            a.args.push_back(choice == spec.constants.size() ? Value::null() : Value::symbol(spec.constants[choice]));
        }
        d.insert(a);
    }
    return d;
}

/// Textbook first-order satisfaction, for null-free instances.
inline bool oracle_classical(const Instance& d, const Constraint& c) {
    auto dom = d.values();
    for (const auto& v : c.constants()) dom.insert(v);
    if (!c.null_guard) dom.erase(Value::null());
    std::vector<Value> values(dom.begin(), dom.end());
    auto universals = c.universal_vars();
    std::map<std::string, Value> s;
    auto val = [&](const Term& t) { return t.is_var() ? s.at(t.var_name()) : t.value(); };
    auto holds = [&](const DbAtom& a) {
        Atom g{a.predicate, {}};
        for (const auto& t : a.terms) g.args.push_back(val(t));
        return d.contains(g);
    };
    bool result = true;
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        if (!result) return;
        if (k < universals.size()) {
            for (const auto& v : values) {
                s[universals[k]] = v;
                go(k + 1);
            }
            return;
        }
        if (!std::all_of(c.antecedent.begin(), c.antecedent.end(), holds)) return;
        if (c.null_guard && !s.at(*c.null_guard).is_null()) return;
        bool ok = false;
        std::function<void(std::size_t)> ex = [&](std::size_t j) {
            if (ok) return;
            if (j < c.existentials.size()) {
                for (const auto& v : values) {
                    s[c.existentials[j]] = v;
                    ex(j + 1);
                }
                return;
            }
            for (const auto& q : c.consequent) ok = ok || holds(q);
            for (const auto& b : c.builtins) ok = ok || compare(b.op, val(b.lhs), val(b.rhs));
        };
        ex(0);
        if (!ok) result = false;
    };
    go(0);
    return result;
}


inline bool classically_consistent(const Instance& d, const ConstraintSet& ic) {
    return std::all_of(ic.begin(), ic.end(), [&](const Constraint& c) { return oracle_classical(d, c); });
}

struct RandomCase {
    std::vector<Sig> sig;
    ConstraintSet ic;
    Instance d;
};

/// A random (IC, D) pair, rejecting most consistent instances so that the
/// suites spend their time on instances that need repairing.
inline RandomCase random_case(std::mt19937& rng, const RandomSpec& spec, double keep_consistent = 0.25) {
    for (;;) {
        RandomCase c;
        c.sig = random_signature(rng, spec);
        c.ic = random_constraints(rng, c.sig, spec);
        c.d = random_instance(rng, c.sig, spec);
        if (satisfies_all(c.d, c.ic).satisfied && std::uniform_real_distribution<>(0, 1)(rng) >= keep_consistent) continue;
        return c;
    }
}

/// Classical repairs of a null-free instance: consistent subsets of the
/// null-free Herbrand base, minimal under set inclusion of the symmetric
/// difference.
inline std::set<Instance> classical_repairs(const Instance& d, const ConstraintSet& ic, const Schema& schema) {
    auto dom = active_domain(d, ic);
    dom.erase(Value::null());
    std::vector<Value> vals(dom.begin(), dom.end());
    std::vector<Atom> base;
    for (const auto& [name, decl] : schema.predicates()) {
        std::vector<std::size_t> idx(decl.arity, 0);
        if (vals.empty()) break;
        for (;;) {
            Atom a{name, {}};
            for (auto i : idx) a.args.push_back(vals[i]);
            base.push_back(a);
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == vals.size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    std::vector<Instance> consistent;
    std::vector<std::set<Atom>> deltas;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << base.size()); ++m) {
        Instance e;
        for (std::size_t i = 0; i < base.size(); ++i) {
            if (m >> i & 1) e.insert(base[i]);
        }
        if (!classically_consistent(e, ic)) continue;
        consistent.push_back(e);
        auto dl = delta(d, e);
        deltas.push_back(std::set<Atom>(dl.begin(), dl.end()));
    }
    std::set<Instance> out;
    for (std::size_t i = 0; i < consistent.size(); ++i) {
        bool minimal = true;
        for (std::size_t j = 0; j < consistent.size() && minimal; ++j) {
            if (j != i && deltas[j].size() < deltas[i].size() &&
                std::includes(deltas[i].begin(), deltas[i].end(), deltas[j].begin(), deltas[j].end())) {
                minimal = false;
            }
        }
        if (minimal) out.insert(consistent[i]);
    }
    return out;
}

/// A safe conjunctive query over the signature, in the query grammar.
inline std::string random_query(std::mt19937& rng, const std::vector<testing_support::Sig>& sig, bool negation) {
    static const std::vector<std::string> vars{"X", "Y", "Z"};
    std::vector<std::string> used, body;
    std::size_t n = 1 + pick(rng, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = sig[pick(rng, sig.size())];
        std::string a = p.name + "(";
        for (std::size_t k = 0; k < p.arity; ++k) {
            std::string t = pick(rng, 6) == 0 ? "a" : vars[pick(rng, vars.size())];
            if (t != "a") used.push_back(t);
            a += (k ? "," : "") + t;
        }
        body.push_back(a + ")");
    }
    if (negation && !used.empty() && pick(rng, 2) == 0) {
        const auto& p = sig[pick(rng, sig.size())];
        std::string a = "not " + p.name + "(";
        for (std::size_t k = 0; k < p.arity; ++k) a += (k ? "," : "") + used[pick(rng, used.size())];
        body.push_back(a + ")");
    }
    if (!used.empty() && pick(rng, 4) == 0) body.push_back(used[pick(rng, used.size())] + " != null");
    std::set<std::string> head_vars;
    for (const auto& v : used) {
        if (pick(rng, 2) == 0) head_vars.insert(v);
    }
    std::string q = "ans";
    if (!head_vars.empty()) {
        q += "(";
        bool first = true;
        for (const auto& v : head_vars) {
            q += (first ? "" : ",") + v;
            first = false;
        }
        q += ")";
    }
    q += " <- ";
    for (std::size_t i = 0; i < body.size(); ++i) q += (i ? ", " : "") + body[i];
    return q + ".";
}

inline Schema schema_of(const std::vector<Sig>& sig) {
    Schema s;
    for (const auto& p : sig) s.declare(p.name, p.arity);
    return s;
}

}  // namespace testing_support

#endif  // NULLCQA_TESTS_SUPPORT_HPP
