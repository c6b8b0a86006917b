#ifndef NULLCQA_CONSTRAINT_HPP
#define NULLCQA_CONSTRAINT_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nullcqa/error.hpp"
#include "nullcqa/lexer.hpp"
#include "nullcqa/relational.hpp"
#include "nullcqa/value.hpp"

namespace nullcqa {

/// A variable or a domain constant.
class Term {
public:
    static Term var(std::string name) { return Term{Repr{Var{std::move(name)}}}; }
    static Term constant(Value v) { return Term{Repr{std::move(v)}}; }

    bool is_var() const { return std::holds_alternative<Var>(repr_); }
    const std::string& var_name() const { return std::get<Var>(repr_).name; }
    const Value& value() const { return std::get<Value>(repr_); }

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term& a, const Term& b) {
        if (a.is_var() != b.is_var()) return a.is_var() ? std::strong_ordering::less : std::strong_ordering::greater;
        if (a.is_var()) return a.var_name() <=> b.var_name();
        return a.value() <=> b.value();
    }

private:
    struct Var {
        std::string name;
        friend bool operator==(const Var&, const Var&) = default;
    };
    using Repr = std::variant<Var, Value>;
    explicit Term(Repr r) : repr_(std::move(r)) {}
    Repr repr_;
};

/// Constraint-language rendering: variables bare, symbol constants quoted.
inline std::string to_string(const Term& t) {
    if (t.is_var()) return t.var_name();
    const auto& v = t.value();
    if (v.is_symbol()) return quote(v.as_symbol());
    return to_string(v);
}

struct DbAtom {
    std::string predicate;
    std::vector<Term> terms;

    friend bool operator==(const DbAtom&, const DbAtom&) = default;
};

inline std::string to_string(const DbAtom& a) {
    std::string out = a.predicate + "(";
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (i) out += ",";
        out += to_string(a.terms[i]);
    }
    return out + ")";
}

struct BuiltinAtom {
    Term lhs;
    CompareOp op = CompareOp::Eq;
    Term rhs;

    friend bool operator==(const BuiltinAtom&, const BuiltinAtom&) = default;
};

inline std::string to_string(const BuiltinAtom& b) {
    return to_string(b.lhs) + " " + to_string(b.op) + " " + to_string(b.rhs);
}

enum class ConstraintKind { General, UIC, RIC, NNC };

inline const char* to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::General: return "general";
        case ConstraintKind::UIC: return "uic";
        case ConstraintKind::RIC: return "ric";
        case ConstraintKind::NNC: return "nnc";
    }
    return "?";
}

/// forall x. P1(x1) & ... & Pm(xm) -> exists z. Q1(y1,z1) | ... | Qn(yn,zn) | phi
///
/// NNCs keep their single antecedent atom and the guarded variable in
/// `null_guard`; their consequent is empty (false).
struct Constraint {
    ConstraintKind kind = ConstraintKind::General;
    std::vector<DbAtom> antecedent;
    std::optional<std::string> null_guard;
    std::vector<DbAtom> consequent;
    std::vector<std::string> existentials;
    std::vector<BuiltinAtom> builtins;
    std::string label;

    bool is_existential(const std::string& v) const {
        return std::find(existentials.begin(), existentials.end(), v) != existentials.end();
    }

    /// Antecedent variables in first-occurrence order.
    std::vector<std::string> universal_vars() const {
        std::vector<std::string> out;
        for (const auto& a : antecedent) {
            for (const auto& t : a.terms) {
                if (t.is_var() && std::find(out.begin(), out.end(), t.var_name()) == out.end()) {
                    out.push_back(t.var_name());
                }
            }
        }
        return out;
    }

    /// 1-based position guarded by an NNC.
    std::size_t nnc_position() const {
        const auto& terms = antecedent.front().terms;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].is_var() && terms[i].var_name() == *null_guard) return i + 1;
        }
        return 0;
    }

    /// 1-based positions of the consequent atom holding existential variables (RICs).
    std::vector<std::size_t> existential_positions() const {
        std::vector<std::size_t> out;
        if (consequent.empty()) return out;
        const auto& terms = consequent.front().terms;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].is_var() && is_existential(terms[i].var_name())) out.push_back(i + 1);
        }
        return out;
    }

    /// Terms of the RIC consequent at non-existential positions (x-bar-prime).
    std::vector<Term> shared_terms() const {
        std::vector<Term> out;
        if (consequent.empty()) return out;
        for (const auto& t : consequent.front().terms) {
            if (!(t.is_var() && is_existential(t.var_name()))) out.push_back(t);
        }
        return out;
    }

    std::set<Value> constants() const {
        std::set<Value> out;
        auto add = [&](const Term& t) {
            if (!t.is_var()) out.insert(t.value());
        };
        for (const auto& a : antecedent) std::for_each(a.terms.begin(), a.terms.end(), add);
        for (const auto& a : consequent) std::for_each(a.terms.begin(), a.terms.end(), add);
        for (const auto& b : builtins) {
            add(b.lhs);
            add(b.rhs);
        }
        return out;
    }

    std::set<std::string> predicates() const {
        std::set<std::string> out;
        for (const auto& a : antecedent) out.insert(a.predicate);
        for (const auto& a : consequent) out.insert(a.predicate);
        return out;
    }
};

/// Renders in the constraint grammar accepted by parse_constraints.
inline std::string to_string(const Constraint& c) {
    std::string out;
    for (std::size_t i = 0; i < c.antecedent.size(); ++i) {
        if (i) out += ", ";
        out += to_string(c.antecedent[i]);
    }
    if (c.null_guard) out += ", isnull(" + *c.null_guard + ")";
    out += " -> ";
    if (c.consequent.empty() && c.builtins.empty()) return out + "false.";
    if (!c.existentials.empty()) {
        out += "exists ";
        for (std::size_t i = 0; i < c.existentials.size(); ++i) {
            if (i) out += ",";
            out += c.existentials[i];
        }
        out += ": ";
    }
    bool first = true;
    for (const auto& a : c.consequent) {
        if (!first) out += " | ";
        first = false;
        out += to_string(a);
    }
    for (const auto& b : c.builtins) {
        if (!first) out += " | ";
        first = false;
        out += to_string(b);
    }
    return out + ".";
}

class ConstraintSet {
public:
    ConstraintSet() = default;
    ConstraintSet(Schema schema, std::vector<Constraint> constraints)
        : schema_(std::move(schema)), constraints_(std::move(constraints)) {}

    const Schema& schema() const { return schema_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    std::size_t size() const { return constraints_.size(); }
    bool empty() const { return constraints_.empty(); }
    auto begin() const { return constraints_.begin(); }
    auto end() const { return constraints_.end(); }
    const Constraint& operator[](std::size_t i) const { return constraints_[i]; }

    std::vector<const Constraint*> uics() const { return of_kind(ConstraintKind::UIC); }
    std::vector<const Constraint*> rics() const { return of_kind(ConstraintKind::RIC); }
    std::vector<const Constraint*> nncs() const { return of_kind(ConstraintKind::NNC); }

    std::set<Value> constants() const {
        std::set<Value> out;
        for (const auto& c : constraints_) out.merge(c.constants());
        return out;
    }

private:
    std::vector<const Constraint*> of_kind(ConstraintKind k) const {
        std::vector<const Constraint*> out;
        for (const auto& c : constraints_) {
            if (c.kind == k) out.push_back(&c);
        }
        return out;
    }

    Schema schema_;
    std::vector<Constraint> constraints_;
};

/// adom(D) u const(IC) u {null}, in canonical order.
inline std::set<Value> active_domain(const Instance& d, const ConstraintSet& ic) {
    auto out = d.values();
    out.merge(ic.constants());
    out.insert(Value::null());
    return out;
}

namespace detail {

inline ConstraintKind classify(const Constraint& c) {
    if (c.null_guard) return ConstraintKind::NNC;
    if (c.existentials.empty()) return ConstraintKind::UIC;
    if (c.antecedent.size() != 1 || c.consequent.size() != 1 || !c.builtins.empty()) {
        return ConstraintKind::General;
    }
    std::set<std::string> seen;
    for (const auto& t : c.antecedent.front().terms) {
        if (!t.is_var() || !seen.insert(t.var_name()).second) return ConstraintKind::General;
    }
    std::set<std::string> seen_q;
    for (const auto& t : c.consequent.front().terms) {
        if (!t.is_var() || !seen_q.insert(t.var_name()).second) return ConstraintKind::General;
    }
    return ConstraintKind::RIC;
}

class ConstraintParser {
public:
    ConstraintParser(std::string_view text, const Schema& schema) : cur_(text), schema_(schema), strict_(!schema.empty()) {}

    ConstraintSet parse() {
        std::vector<Constraint> out;
        while (!cur_.done()) {
            auto start = cur_.peek();
            Constraint c = parse_one();
            c.label = "ic" + std::to_string(out.size() + 1);
            try {
                validate(c);
            } catch (const Error& e) {
                throw ParseError(e.what(), start.line, start.column);
            }
            c.kind = classify(c);
            out.push_back(std::move(c));
        }
        return ConstraintSet(inferred_, std::move(out));
    }

private:
    Term parse_term() {
        const auto& t = cur_.peek();
        switch (t.kind) {
            case lex::Tok::Integer: return Term::constant(lex::integer_value(cur_.next()));
            case lex::Tok::String: return Term::constant(Value::symbol(cur_.next().text));
            case lex::Tok::Ident: {
                auto tok = cur_.next();
                if (tok.text == "null") {
                    throw ParseError("null may not be used as a term; use isnull(var) in a NOT NULL constraint",
                                     tok.line, tok.column);
                }
                return Term::var(tok.text);
            }
            default: cur_.fail("expected a variable or constant");
        }
    }

    DbAtom parse_atom() {
        auto name = cur_.expect(lex::Tok::Ident, "predicate name");
        cur_.expect(lex::Tok::LParen, "'('");
        DbAtom a{name.text, {}};
        a.terms.push_back(parse_term());
        while (cur_.accept(lex::Tok::Comma)) a.terms.push_back(parse_term());
        cur_.expect(lex::Tok::RParen, "')'");
        if (strict_) {
            if (!schema_.contains(a.predicate)) {
                throw ParseError("unknown predicate " + a.predicate, name.line, name.column);
            }
            if (schema_.arity(a.predicate) != a.terms.size()) {
                throw ParseError("arity mismatch for " + a.predicate, name.line, name.column);
            }
            inferred_.declare(a.predicate, a.terms.size());
        } else {
            try {
                inferred_.declare(a.predicate, a.terms.size());
            } catch (const Error& e) {
                throw ParseError(e.what(), name.line, name.column);
            }
        }
        return a;
    }

    BuiltinAtom parse_builtin() {
        auto lhs = parse_term();
        auto op = lex::parse_op(cur_.expect(lex::Tok::Op, "comparison operator"));
        auto rhs = parse_term();
        return BuiltinAtom{std::move(lhs), op, std::move(rhs)};
    }

    Constraint parse_one() {
        Constraint c;
        c.antecedent.push_back(parse_atom());
        while (cur_.accept(lex::Tok::Comma)) {
            if (cur_.at_ident("isnull") && cur_.peek(1).kind == lex::Tok::LParen) {
                auto kw = cur_.next();
                cur_.next();
                if (c.null_guard) throw ParseError("at most one isnull guard per constraint", kw.line, kw.column);
                c.null_guard = cur_.expect(lex::Tok::Ident, "variable").text;
                cur_.expect(lex::Tok::RParen, "')'");
                break;
            }
            c.antecedent.push_back(parse_atom());
        }
        cur_.expect(lex::Tok::Arrow, "'->'");
        if (cur_.at_ident("false") && cur_.peek(1).kind == lex::Tok::Dot) {
            cur_.next();
        } else {
            if (cur_.at_ident("exists") && cur_.peek(1).kind == lex::Tok::Ident) {
                cur_.next();
                c.existentials.push_back(cur_.expect(lex::Tok::Ident, "variable").text);
                while (cur_.accept(lex::Tok::Comma)) c.existentials.push_back(cur_.expect(lex::Tok::Ident, "variable").text);
                cur_.expect(lex::Tok::Colon, "':'");
            }
            do {
                if (cur_.at(lex::Tok::Ident) && cur_.peek(1).kind == lex::Tok::LParen) {
                    c.consequent.push_back(parse_atom());
                } else {
                    c.builtins.push_back(parse_builtin());
                }
            } while (cur_.accept(lex::Tok::Pipe));
        }
        cur_.expect(lex::Tok::Dot, "'.'");
        return c;
    }

    static void validate(const Constraint& c) {
        auto universals = c.universal_vars();
        auto is_universal = [&](const std::string& v) {
            return std::find(universals.begin(), universals.end(), v) != universals.end();
        };
        std::set<std::string> ex_seen;
        for (const auto& z : c.existentials) {
            if (!ex_seen.insert(z).second) throw Error(ErrorKind::InvalidConstraint, "existential " + z + " declared twice");
            if (is_universal(z)) {
                throw Error(ErrorKind::InvalidConstraint, "existential " + z + " also occurs in the antecedent");
            }
        }
        if (c.null_guard) {
            if (c.antecedent.size() != 1 || !c.consequent.empty() || !c.builtins.empty()) {
                throw Error(ErrorKind::InvalidConstraint,
                            "isnull is only allowed in NOT NULL constraints: P(x..), isnull(x) -> false");
            }
            if (!is_universal(*c.null_guard)) {
                throw Error(ErrorKind::InvalidConstraint, "isnull variable " + *c.null_guard + " not in antecedent");
            }
            return;
        }
        std::map<std::string, std::size_t> owner;
        for (std::size_t j = 0; j < c.consequent.size(); ++j) {
            for (const auto& t : c.consequent[j].terms) {
                if (!t.is_var()) continue;
                const auto& v = t.var_name();
                if (c.is_existential(v)) {
                    auto [it, fresh] = owner.try_emplace(v, j);
                    if (!fresh && it->second != j) {
                        throw Error(ErrorKind::InvalidConstraint,
                                    "existential " + v + " shared by two consequent atoms");
                    }
                } else if (!is_universal(v)) {
                    throw Error(ErrorKind::InvalidConstraint,
                                "consequent variable " + v + " is neither universal nor declared existential");
                }
            }
        }
        for (const auto& z : c.existentials) {
            if (!owner.count(z)) throw Error(ErrorKind::InvalidConstraint, "existential " + z + " is unused");
        }
        for (const auto& b : c.builtins) {
            for (const Term* t : {&b.lhs, &b.rhs}) {
                if (!t->is_var()) continue;
                if (c.is_existential(t->var_name())) {
                    throw Error(ErrorKind::InvalidConstraint,
                                "existential variable " + t->var_name() + " used in a builtin");
                }
                if (!is_universal(t->var_name())) {
                    throw Error(ErrorKind::InvalidConstraint,
                                "builtin variable " + t->var_name() + " does not occur in the antecedent");
                }
            }
        }
    }

    lex::Cursor cur_;
    const Schema& schema_;
    bool strict_;
    Schema inferred_;
};

}  // namespace detail

/// Parses and classifies constraints. With a non-empty schema, predicates and
/// arities are checked against it and the result carries that schema;
/// otherwise the schema is inferred from the constraints themselves.
inline ConstraintSet parse_constraints(std::string_view text, const Schema& schema = {}) {
    auto parsed = detail::ConstraintParser(text, schema).parse();
    if (schema.empty()) return parsed;
    return ConstraintSet(schema, parsed.constraints());
}

}  // namespace nullcqa

#endif  // NULLCQA_CONSTRAINT_HPP
