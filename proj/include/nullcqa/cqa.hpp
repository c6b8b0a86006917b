#ifndef NULLCQA_CQA_HPP
#define NULLCQA_CQA_HPP

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nullcqa/compiler.hpp"
#include "nullcqa/constraint.hpp"
#include "nullcqa/error.hpp"
#include "nullcqa/lexer.hpp"
#include "nullcqa/relational.hpp"
#include "nullcqa/repair.hpp"
#include "nullcqa/solver.hpp"

namespace nullcqa {

/// ans(x̄) <- A1, ..., not B1, ..., builtins.   An empty head is boolean.
struct Query {
    std::string name = "ans";
    std::vector<Term> head;
    std::vector<DbAtom> positive;
    std::vector<DbAtom> negative;
    std::vector<BuiltinAtom> builtins;

    bool boolean() const { return head.empty(); }
};

inline std::string to_string(const Query& q) {
    auto term = [](const Term& t) {
        if (t.is_var()) return t.var_name();
        if (t.value().is_symbol() && is_identifier(t.value().as_symbol()) &&
            std::islower(static_cast<unsigned char>(t.value().as_symbol()[0])) && t.value().as_symbol() != "null" &&
            t.value().as_symbol() != "not") {
            return t.value().as_symbol();
        }
        return to_string(t.value());
    };
    auto atom = [&](const DbAtom& a) {
        std::string s = a.predicate + "(";
        for (std::size_t i = 0; i < a.terms.size(); ++i) s += (i ? "," : "") + term(a.terms[i]);
        return s + ")";
    };
    std::string out = q.name;
    if (!q.head.empty()) {
        out += "(";
        for (std::size_t i = 0; i < q.head.size(); ++i) out += (i ? "," : "") + term(q.head[i]);
        out += ")";
    }
    std::vector<std::string> body;
    for (const auto& a : q.positive) body.push_back(atom(a));
    for (const auto& a : q.negative) body.push_back("not " + atom(a));
    for (const auto& b : q.builtins) body.push_back(term(b.lhs) + " " + to_string(b.op) + " " + term(b.rhs));
    out += " <-";
    for (std::size_t i = 0; i < body.size(); ++i) out += (i ? ", " : " ") + body[i];
    return out + ".";
}

/// Variables of head, negated atoms or builtins that no positive atom binds.
inline std::set<std::string> unsafe_variables(const Query& q) {
    std::set<std::string> bound, out;
    for (const auto& a : q.positive) {
        for (const auto& t : a.terms) {
            if (t.is_var()) bound.insert(t.var_name());
        }
    }
    auto check = [&](const Term& t) {
        if (t.is_var() && !bound.count(t.var_name())) out.insert(t.var_name());
    };
    for (const auto& t : q.head) check(t);
    for (const auto& a : q.negative) {
        for (const auto& t : a.terms) check(t);
    }
    for (const auto& b : q.builtins) {
        check(b.lhs);
        check(b.rhs);
    }
    return out;
}

namespace detail {

class QueryParser {
public:
    explicit QueryParser(std::string_view text) : cur_(text) {}

    Query parse() {
        Query q;
        auto name = cur_.expect(lex::Tok::Ident, "query name");
        if (is_variable_name(name.text)) throw ParseError("query name must start lowercase", name.line, name.column);
        q.name = name.text;
        if (cur_.accept(lex::Tok::LParen)) {
            if (!cur_.at(lex::Tok::RParen)) {
                do q.head.push_back(parse_term());
                while (cur_.accept(lex::Tok::Comma));
            }
            cur_.expect(lex::Tok::RParen, "')'");
        }
        if (!cur_.accept(lex::Tok::LArrow) && !cur_.accept(lex::Tok::If)) cur_.fail("expected '<-'");
        do parse_literal(q);
        while (cur_.accept(lex::Tok::Comma));
        cur_.accept(lex::Tok::Dot);
        if (!cur_.done()) cur_.fail("expected end of query");
        if (auto bad = unsafe_variables(q); !bad.empty()) {
            std::string vars;
            for (const auto& v : bad) vars += (vars.empty() ? "" : ", ") + v;
            throw Error(ErrorKind::UnsafeQuery, "unsafe query: " + vars + " not bound by a positive atom");
        }
        return q;
    }

private:
    static bool is_variable_name(const std::string& s) {
        return !s.empty() && (std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_');
    }

    Term parse_term() {
        const auto& t = cur_.peek();
        switch (t.kind) {
            case lex::Tok::Integer: return Term::constant(lex::integer_value(cur_.next()));
            case lex::Tok::String: return Term::constant(Value::symbol(cur_.next().text));
            case lex::Tok::Ident: {
                auto tok = cur_.next();
                if (is_variable_name(tok.text)) return Term::var(tok.text);
                if (tok.text == "null") return Term::constant(Value::null());
                return Term::constant(Value::symbol(tok.text));
            }
            default: cur_.fail("expected a term");
        }
    }

    DbAtom parse_atom() {
        auto name = cur_.expect(lex::Tok::Ident, "predicate name");
        DbAtom a{name.text, {}};
        cur_.expect(lex::Tok::LParen, "'('");
        if (!cur_.at(lex::Tok::RParen)) {
            do a.terms.push_back(parse_term());
            while (cur_.accept(lex::Tok::Comma));
        }
        cur_.expect(lex::Tok::RParen, "')'");
        return a;
    }

    void parse_literal(Query& q) {
        if (cur_.at_ident("not") && cur_.peek(1).kind == lex::Tok::Ident) {
            cur_.next();
            q.negative.push_back(parse_atom());
        } else if (cur_.at(lex::Tok::Ident) && cur_.peek(1).kind == lex::Tok::LParen) {
            q.positive.push_back(parse_atom());
        } else {
            auto lhs = parse_term();
            auto op = lex::parse_op(cur_.expect(lex::Tok::Op, "comparison operator"));
            auto rhs = parse_term();
            q.builtins.push_back(BuiltinAtom{lhs, op, rhs});
        }
    }

    lex::Cursor cur_;
};

}  // namespace detail

inline Query parse_query(std::string_view text) { return detail::QueryParser(text).parse(); }

/// Rejects atoms over predicates the schema does not declare, or with the
/// wrong arity.
inline void check_query(const Query& q, const Schema& schema) {
    for (const auto* atoms : {&q.positive, &q.negative}) {
        for (const auto& a : *atoms) {
            if (!schema.contains(a.predicate)) {
                throw Error(ErrorKind::UnknownPredicate, "query mentions unknown predicate " + a.predicate);
            }
            if (schema.arity(a.predicate) != a.terms.size()) {
                throw Error(ErrorKind::Schema, "query atom " + a.predicate + " has arity " +
                                                   std::to_string(a.terms.size()) + ", declared " +
                                                   std::to_string(schema.arity(a.predicate)));
            }
        }
    }
}

/// Answer tuples; a boolean query answers yes iff it holds the empty tuple.
struct AnswerSet {
    std::size_t arity = 0;
    std::set<std::vector<Value>> tuples;

    bool boolean() const { return arity == 0; }
    bool yes() const { return !tuples.empty(); }

    friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

inline AnswerSet intersect(const AnswerSet& a, const AnswerSet& b) {
    AnswerSet out{a.arity, {}};
    std::set_intersection(a.tuples.begin(), a.tuples.end(), b.tuples.begin(), b.tuples.end(),
                          std::inserter(out.tuples, out.tuples.end()));
    return out;
}

/// Drops tuples that contain null.
inline AnswerSet without_nulls(const AnswerSet& a) {
    AnswerSet out{a.arity, {}};
    for (const auto& t : a.tuples) {
        if (std::none_of(t.begin(), t.end(), [](const Value& v) { return v.is_null(); })) out.tuples.insert(t);
    }
    return out;
}

/// Classical evaluation with null an ordinary constant; `not A` holds when
/// the instantiated atom is absent.
inline AnswerSet evaluate(const Instance& d, const Query& q) {
    if (auto bad = unsafe_variables(q); !bad.empty()) throw Error(ErrorKind::UnsafeQuery, "unsafe query " + to_string(q));
    AnswerSet out{q.head.size(), {}};
    std::map<std::string, Value> s;
    auto value = [&](const Term& t) -> const Value& { return t.is_var() ? s.at(t.var_name()) : t.value(); };
    auto ground_atom = [&](const DbAtom& a) {
        Atom g{a.predicate, {}};
        for (const auto& t : a.terms) g.args.push_back(value(t));
        return g;
    };
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        if (k == q.positive.size()) {
            for (const auto& b : q.builtins) {
                if (!compare(b.op, value(b.lhs), value(b.rhs))) return;
            }
            for (const auto& a : q.negative) {
                if (d.contains(ground_atom(a))) return;
            }
            std::vector<Value> row;
            for (const auto& t : q.head) row.push_back(value(t));
            out.tuples.insert(std::move(row));
            return;
        }
        const auto& pat = q.positive[k];
        for (const auto& fact : d.atoms_of(pat.predicate)) {
            if (fact.args.size() != pat.terms.size()) continue;
            std::vector<std::string> bound;
            bool match = true;
            for (std::size_t i = 0; i < pat.terms.size() && match; ++i) {
                const auto& t = pat.terms[i];
                if (!t.is_var()) {
                    match = t.value() == fact.args[i];
                } else if (auto it = s.find(t.var_name()); it != s.end()) {
                    match = it->second == fact.args[i];
                } else {
                    s.emplace(t.var_name(), fact.args[i]);
                    bound.push_back(t.var_name());
                }
            }
            if (match) go(k + 1);
            for (const auto& v : bound) s.erase(v);
        }
    };
    go(0);
    return out;
}

/// Tuples that are answers in every repair.
inline AnswerSet consistent_answers(const Instance& d, const ConstraintSet& ic, const Query& q,
                                    const RepairOptions& opts = {}) {
    auto reps = repairs(d, ic, opts);
    std::optional<AnswerSet> out;
    for (const auto& r : reps.repairs) {
        auto a = evaluate(r.instance, q);
        out = out ? intersect(*out, a) : a;
    }
    return out ? *out : AnswerSet{q.head.size(), {}};
}

struct ProgramRouteOptions {
    CompileOptions compile;
    GroundOptions ground;
    SolveOptions solve;
};

/// The query as a rule over t**-annotated atoms, named after the query.
inline ProgramRule query_rule(const Query& q) {
    auto atom = [](const DbAtom& a) {
        return ProgramAtom{program_predicate(a.predicate), a.terms, Annotation::Tss};
    };
    ProgramRule r;
    r.kind = RuleKind::Query;
    r.head = {ProgramAtom{q.name, q.head, std::nullopt}};
    for (const auto& a : q.positive) r.positive.push_back(atom(a));
    for (const auto& a : q.negative) r.negative.push_back(atom(a));
    r.builtins = q.builtins;
    return r;
}

/// Cautious reasoning over the repair program: tuples derived in every
/// stable model.
inline AnswerSet consistent_answers_via_program(const Instance& d, const ConstraintSet& ic, const Query& q,
                                                const ProgramRouteOptions& opts = {}) {
    auto program = compile(d, ic, opts.compile);
    program.rules.push_back(query_rule(q));
    auto universe = active_domain(d, ic);
    for (const auto& t : program_constants(program)) universe.insert(t);
    auto g = ground(program, universe, opts.ground);
    auto models = stable_models(g, opts.solve);
    if (models.empty()) throw Error(ErrorKind::NoStableModels, "the repair program has no stable models");
    std::optional<AnswerSet> out;
    for (const auto& m : models) {
        AnswerSet a{q.head.size(), {}};
        for (const auto& atom : m) {
            if (atom.predicate == q.name && !atom.annotation && atom.args.size() == q.head.size()) a.tuples.insert(atom.args);
        }
        out = out ? intersect(*out, a) : a;
    }
    return *out;
}

}  // namespace nullcqa

#endif  // NULLCQA_CQA_HPP
