#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>

#include "nullcqa/satisfaction.hpp"
#include "support.hpp"

using namespace nullcqa;

namespace {

bool sat(const std::string& d, const std::string& ic, std::size_t index = 0) {
    auto set = parse_constraints(ic);
    return check_constraint(parse_instance(d), set[index]).satisfied;
}

/// Brute-force reading of the null-aware semantics: enumerate every
/// valuation of the universal variables over adom, let a null at any
/// relevant antecedent position discharge it, and otherwise look for a
/// witness in D that agrees on relevant positions only. Relevance is
/// per attribute: a position is relevant when some atom of the constraint
/// holds a constant or a repeated variable there.
bool oracle_null_aware(const Instance& d, const Constraint& c) {
    std::map<std::string, int> occurrences;
    auto count = [&](const Term& t) {
        if (t.is_var()) ++occurrences[t.var_name()];
    };
    for (const auto* side : {&c.antecedent, &c.consequent}) {
        for (const auto& a : *side) std::for_each(a.terms.begin(), a.terms.end(), count);
    }
    for (const auto& b : c.builtins) {
        count(b.lhs);
        count(b.rhs);
    }
    std::set<std::pair<std::string, std::size_t>> relevant;
    for (const auto* side : {&c.antecedent, &c.consequent}) {
        for (const auto& a : *side) {
            for (std::size_t i = 0; i < a.terms.size(); ++i) {
                const auto& t = a.terms[i];
                if (!t.is_var() || occurrences[t.var_name()] >= 2) relevant.insert({a.predicate, i});
            }
        }
    }
    auto dom = d.values();
    dom.insert(Value::null());
    for (const auto& v : c.constants()) dom.insert(v);
    std::vector<Value> values(dom.begin(), dom.end());
    auto universals = c.universal_vars();
    std::vector<std::string> all_vars = universals;
    all_vars.insert(all_vars.end(), c.existentials.begin(), c.existentials.end());
    std::map<std::string, Value> s;
    auto val = [&](const Term& t) { return t.is_var() ? s.at(t.var_name()) : t.value(); };
    auto matches = [&](const DbAtom& a) {
        for (const auto& fact : d.atoms_of(a.predicate)) {
            bool ok = true;
            for (std::size_t i = 0; i < a.terms.size() && ok; ++i) {
                const auto& t = a.terms[i];
                if (!relevant.count({a.predicate, i})) continue;
                ok = fact.args[i] == val(t);
            }
            if (ok) return true;
        }
        return false;
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
        if (!std::all_of(c.antecedent.begin(), c.antecedent.end(), matches)) return;
        for (const auto& a : c.antecedent) {
            for (std::size_t i = 0; i < a.terms.size(); ++i) {
                const auto& t = a.terms[i];
                if (t.is_var() && relevant.count({a.predicate, i}) && s.at(t.var_name()).is_null()) return;
            }
        }
        bool holds = false;
        std::function<void(std::size_t)> ex = [&](std::size_t j) {
            if (holds) return;
            if (j < c.existentials.size()) {
                for (const auto& v : values) {
                    s[c.existentials[j]] = v;
                    ex(j + 1);
                }
                return;
            }
            for (const auto& q : c.consequent) holds = holds || matches(q);
            for (const auto& b : c.builtins) holds = holds || compare(b.op, val(b.lhs), val(b.rhs));
        };
        ex(0);
        if (!holds) result = false;
    };
    go(0);
    return result;
}

}  // namespace

TEST(Satisfaction, Example4SemanticsMatrix) {
    // psi1 has only relevant attributes P[2], P[3], R[1], R[2]: null in P[3] discharges it
    EXPECT_TRUE(sat("P(a, b, null).", "P(x, y, z) -> R(y, z)."));
    // psi2 is checked on P[1], P[2] which carry no null
    EXPECT_FALSE(sat("P(a, b, null).", "P(x, y, z) -> R(x, y)."));
}

TEST(Satisfaction, Example10Projection) {
    auto ic = parse_constraints("P(x, y, z) -> R(x, y).\nP(x, y, z), R(z, w) -> exists v: R(x, v) | w > 3.");
    auto d = parse_instance("P(a, b, a). P(b, c, a). R(a, 5). R(a, 2).");
    auto t = transform(ic[0]);
    auto p = project(d, t.relevant);
    EXPECT_EQ(p.tuples("P"), (std::set<std::vector<Value>>{{Value::symbol("a"), Value::symbol("b")},
                                                           {Value::symbol("b"), Value::symbol("c")}}));
    EXPECT_EQ(p.tuples("R").size(), 2u);
    auto tg = transform(ic[1]);
    auto pg = project(d, tg.relevant);
    EXPECT_EQ(pg.tuples("P"), (std::set<std::vector<Value>>{{Value::symbol("a"), Value::symbol("a")},
                                                            {Value::symbol("b"), Value::symbol("a")}}));
}

TEST(Satisfaction, Example11ConsistentThenViolated) {
    auto ic = parse_constraints("P(x, y, z) -> R(x, y).\nT(x) -> exists y, z: P(x, y, z).");
    auto d = parse_instance("P(a, d, e). P(b, null, g). R(a, d). T(b).");
    EXPECT_EQ(to_string(relevant_attributes(ic[0])), "{P[1], P[2], R[1], R[2]}");
    EXPECT_EQ(to_string(relevant_attributes(ic[1])), "{P[1], T[1]}");
    auto r = satisfies_all(d, ic);
    EXPECT_TRUE(r.constraints[0].satisfied);
    EXPECT_TRUE(r.constraints[1].satisfied);
    d.insert(parse_instance("P(f, d, null).").atoms_of("P").front());
    auto r2 = satisfies_all(d, ic);
    EXPECT_FALSE(r2.constraints[0].satisfied);
    EXPECT_TRUE(r2.constraints[1].satisfied);
    ASSERT_EQ(r2.constraints[0].violations.size(), 1u);
    EXPECT_EQ(to_string(r2.constraints[0].violations[0]), "{x=f, y=d}");
}

TEST(Satisfaction, Example12NullJoinsAsConstant) {
    auto ic = parse_constraints("P1(x, y, w), P2(y, z) -> exists u: Q(x, z, u).");
    auto d = parse_instance(
        "P1(a, b, c). P1(d, null, c). P1(b, e, null). P1(null, b, b).\n"
        "P2(b, a). P2(e, c). P2(d, null). P2(null, b).\n"
        "Q(a, a, c). Q(b, null, c). Q(b, c, d). Q(null, c, a).");
    EXPECT_EQ(to_string(relevant_attributes(ic[0])), "{P1[1], P1[2], P2[1], P2[2], Q[1], Q[2]}");
    EXPECT_TRUE(check_constraint(d, ic[0]).satisfied);
}

TEST(Satisfaction, Example13RepeatedExistential) {
    auto ic = parse_constraints("P(x, y) -> exists z: Q(x, z, z).");
    auto d = parse_instance("P(a, b). P(null, c). Q(a, null, null).");
    EXPECT_EQ(to_string(relevant_attributes(ic[0])), "{P[1], Q[1], Q[2], Q[3]}");
    auto t = transform(ic[0]);
    EXPECT_EQ(t.guards, std::vector<std::string>{"x"});
    EXPECT_TRUE(check_constraint(d, ic[0]).satisfied);
    auto bad = parse_instance("P(a, b). Q(a, null, b).");
    EXPECT_FALSE(check_constraint(bad, ic[0]).satisfied);
}

TEST(Satisfaction, Example19IsInconsistent) {
    auto ic = parse_constraints("R(x, y), R(x, z) -> y = z.\nS(u, v) -> exists y: R(v, y).\nR(x, y), isnull(x) -> false.");
    auto r = satisfies_all(parse_instance("R(a, b). R(a, c). S(e, f). S(null, a)."), ic);
    EXPECT_FALSE(r.satisfied);
    EXPECT_FALSE(r.constraints[0].satisfied);
    EXPECT_FALSE(r.constraints[1].satisfied);
    EXPECT_TRUE(r.constraints[2].satisfied);
    EXPECT_EQ(r.violated().size(), 2u);
}

TEST(Satisfaction, NullOnNonRelevantAttributeStillViolates) {
    // a classical null-ignoring reading would accept this
    EXPECT_FALSE(sat("P(b, null).", "P(x, y) -> R(x)."));
    EXPECT_TRUE(sat("P(b, null). R(b).", "P(x, y) -> R(x)."));
}

TEST(Satisfaction, NncIsClassical) {
    auto ic = parse_constraints("R(x, y), isnull(y) -> false.");
    auto r = check_constraint(parse_instance("R(a, null). R(b, c)."), ic[0]);
    EXPECT_FALSE(r.satisfied);
    ASSERT_EQ(r.null_witnesses.size(), 1u);
    EXPECT_EQ(to_string(r.null_witnesses[0]), "R(a,null)");
}

TEST(Satisfaction, DenialsAndBuiltins) {
    EXPECT_FALSE(sat("P(a). Q(a).", "P(x), Q(x) -> false."));
    EXPECT_TRUE(sat("P(null). Q(null).", "P(x), Q(x) -> false."));
    EXPECT_TRUE(sat("E(1, 150).", "E(x, s) -> s > 100."));
    EXPECT_FALSE(sat("E(1, 50).", "E(x, s) -> s > 100."));
    EXPECT_TRUE(sat("E(1, null).", "E(x, s) -> s > 100."));
}

TEST(Satisfaction, TransformRendering) {
    auto ic = parse_constraints("P(x, y, z) -> R(x, y).");
    EXPECT_EQ(to_string(transform(ic[0])), "P^A(x,y) -> IsNull(x) | IsNull(y) | R^A(x,y)");
    auto nnc = parse_constraints("P(x), isnull(x) -> false.");
    EXPECT_THROW(transform(nnc[0]), Error);
}

TEST(SatisfactionProperty, AgreesWithBruteForceNullAwareReading) {
    std::mt19937 rng(11);
    testing_support::RandomSpec spec;
    spec.max_arity = 3;
    for (int i = 0; i < 400; ++i) {
        auto sig = testing_support::random_signature(rng, spec);
        auto ic = testing_support::random_constraints(rng, sig, spec);
        auto d = testing_support::random_instance(rng, sig, spec);
        for (const auto& c : ic) {
            if (c.kind == ConstraintKind::NNC) continue;
            EXPECT_EQ(satisfies(d, c).satisfied, oracle_null_aware(d, c)) << to_string(c) << " on " << to_string(d);
        }
    }
}

TEST(SatisfactionProperty, NullFreeCoincidesWithClassical) {
    std::mt19937 rng(12);
    testing_support::RandomSpec spec;
    spec.nulls = false;
    spec.max_arity = 3;
    for (int i = 0; i < 400; ++i) {
        auto sig = testing_support::random_signature(rng, spec);
        auto ic = testing_support::random_constraints(rng, sig, spec);
        auto d = testing_support::random_instance(rng, sig, spec);
        for (const auto& c : ic) {
            EXPECT_EQ(check_constraint(d, c).satisfied, testing_support::oracle_classical(d, c))
                << to_string(c) << " on " << to_string(d);
        }
    }
}

TEST(SatisfactionProperty, GuardSoundness) {
    // a null in a relevant antecedent attribute can never cause a violation
    std::mt19937 rng(13);
    testing_support::RandomSpec spec;
    for (int i = 0; i < 300; ++i) {
        auto sig = testing_support::random_signature(rng, spec);
        auto ic = testing_support::random_constraints(rng, sig, spec);
        auto d = testing_support::random_instance(rng, sig, spec);
        for (const auto& c : ic) {
            if (c.kind == ConstraintKind::NNC) continue;
            auto t = transform(c);
            for (const auto& v : satisfies(d, c).violations) {
                for (const auto& [name, value] : v) {
                    if (std::find(t.guards.begin(), t.guards.end(), name) != t.guards.end()) {
                        EXPECT_FALSE(value.is_null()) << to_string(c) << " " << to_string(v);
                    }
                }
            }
        }
    }
}

TEST(SatisfactionProperty, NonRelevantAttributesDoNotMatter) {
    // overwrite attributes outside A(psi) and the verdict stays put
    std::mt19937 rng(14);
    testing_support::RandomSpec spec;
    spec.max_arity = 3;
    for (int i = 0; i < 300; ++i) {
        auto sig = testing_support::random_signature(rng, spec);
        auto ic = testing_support::random_constraints(rng, sig, spec);
        auto d = testing_support::random_instance(rng, sig, spec);
        for (const auto& c : ic) {
            if (c.kind == ConstraintKind::NNC) continue;
            auto rel = relevant_attributes(c);
            Instance e;
            for (auto a : d) {
                for (std::size_t k = 0; k < a.args.size(); ++k) {
                    if (!rel.count(Position{a.predicate, k + 1})) a.args[k] = Value::symbol("zz");
                }
                e.insert(a);
            }
            EXPECT_EQ(satisfies(d, c).satisfied, satisfies(e, c).satisfied) << to_string(c) << " on " << to_string(d);
        }
    }
}

TEST(SatisfactionProperty, ReportedViolationsAreReal) {
    std::mt19937 rng(15);
    testing_support::RandomSpec spec;
    for (int i = 0; i < 300; ++i) {
        auto sig = testing_support::random_signature(rng, spec);
        auto ic = testing_support::random_constraints(rng, sig, spec);
        auto d = testing_support::random_instance(rng, sig, spec);
        for (const auto& c : ic) {
            if (c.kind == ConstraintKind::NNC) continue;
            auto t = transform(c);
            auto p = project(d, t.relevant);
            for (const auto& v : satisfies(d, c).violations) {
                std::map<std::string, Value> s(v.begin(), v.end());
                // every antecedent atom is present in the projection under v
                for (const auto& a : t.antecedent) {
                    std::vector<Value> row;
                    for (const auto& term : a.terms) row.push_back(term.is_var() ? s.at(term.var_name()) : term.value());
                    EXPECT_TRUE(p.tuples(a.predicate).count(row)) << to_string(c);
                }
                // and no guard is null
                for (const auto& g : t.guards) EXPECT_FALSE(s.at(g).is_null());
            }
        }
    }
}
