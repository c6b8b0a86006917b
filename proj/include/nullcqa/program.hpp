#ifndef NULLCQA_PROGRAM_HPP
#define NULLCQA_PROGRAM_HPP

#include <cctype>
#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nullcqa/constraint.hpp"
#include "nullcqa/lexer.hpp"
#include "nullcqa/value.hpp"

namespace nullcqa {

/// Repair-advice annotations carried in the extra last argument.
enum class Annotation {
    Ta,   // advised to be made true
    Fa,   // advised to be made false
    Ts,   // true or becomes true
    Tss,  // true in the repair
};

inline const char* to_string(Annotation a) {
    switch (a) {
        case Annotation::Ta: return "ta";
        case Annotation::Fa: return "fa";
        case Annotation::Ts: return "ts";
        case Annotation::Tss: return "tss";
    }
    return "?";
}

inline std::optional<Annotation> parse_annotation(std::string_view s) {
    if (s == "ta") return Annotation::Ta;
    if (s == "fa") return Annotation::Fa;
    if (s == "ts") return Annotation::Ts;
    if (s == "tss") return Annotation::Tss;
    return std::nullopt;
}

/// Program-text rendering of a constant. Bare only when it lexes back as the
/// same constant: lowercase identifiers other than null and the annotation
/// names.
inline std::string program_constant(const Value& v) {
    if (v.is_null()) return "null";
    if (v.is_integer()) return std::to_string(v.as_integer());
    const auto& s = v.as_symbol();
    if (is_identifier(s) && std::islower(static_cast<unsigned char>(s[0])) && s != "null" && s != "not" && s != "v" &&
        !parse_annotation(s)) {
        return s;
    }
    return quote(s);
}

inline std::string program_term(const Term& t) { return t.is_var() ? t.var_name() : program_constant(t.value()); }

/// Program-level name of a schema predicate: first letter lowercased, `_` appended.
inline std::string program_predicate(const std::string& schema_name) {
    std::string out = schema_name;
    if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
    return out + "_";
}

struct ProgramAtom {
    std::string predicate;
    std::vector<Term> args;
    std::optional<Annotation> annotation;

    friend bool operator==(const ProgramAtom&, const ProgramAtom&) = default;
};

inline std::string to_string(const ProgramAtom& a) {
    std::string out = a.predicate;
    if (a.args.empty() && !a.annotation) return out;
    out += "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ",";
        out += program_term(a.args[i]);
    }
    if (a.annotation) out += std::string(a.args.empty() ? "" : ",") + to_string(*a.annotation);
    return out + ")";
}

inline std::string program_builtin(const BuiltinAtom& b) {
    return program_term(b.lhs) + " " + to_string(b.op) + " " + program_term(b.rhs);
}

enum class RuleKind {
    Fact,            // 1. database facts
    Uic,             // 2. one rule per (Q', Q'') split
    Ric,             // 3. disjunctive referential rule
    RicAux,          // 3. aux rule per existential variable
    Nnc,             // 4.
    Annotation,      // 5. t* rules
    Interpretation,  // 6. t** rule
    Denial,          // 7. no atom both ta and fa
    Query,
    Other,
};

inline const char* to_string(RuleKind k) {
    switch (k) {
        case RuleKind::Fact: return "fact";
        case RuleKind::Uic: return "uic";
        case RuleKind::Ric: return "ric";
        case RuleKind::RicAux: return "ric_aux";
        case RuleKind::Nnc: return "nnc";
        case RuleKind::Annotation: return "annotation";
        case RuleKind::Interpretation: return "interpretation";
        case RuleKind::Denial: return "denial";
        case RuleKind::Query: return "query";
        case RuleKind::Other: return "other";
    }
    return "?";
}

/// head_1 v ... v head_n :- pos, not neg, builtins.  Empty head = denial.
struct ProgramRule {
    std::vector<ProgramAtom> head;
    std::vector<ProgramAtom> positive;
    std::vector<ProgramAtom> negative;
    std::vector<BuiltinAtom> builtins;
    RuleKind kind = RuleKind::Other;
    std::string provenance;  // label of the source constraint, empty for scaffolding

    bool is_fact() const { return positive.empty() && negative.empty() && builtins.empty() && head.size() == 1; }
    bool is_denial() const { return head.empty(); }
    bool is_disjunctive() const { return head.size() > 1; }
};

inline std::string to_string(const ProgramRule& r) {
    std::string out;
    for (std::size_t i = 0; i < r.head.size(); ++i) {
        if (i) out += " v ";
        out += to_string(r.head[i]);
    }
    std::vector<std::string> body;
    for (const auto& a : r.positive) body.push_back(to_string(a));
    for (const auto& a : r.negative) body.push_back("not " + to_string(a));
    for (const auto& b : r.builtins) body.push_back(program_builtin(b));
    if (!body.empty()) {
        out += r.head.empty() ? ":- " : " :- ";
        for (std::size_t i = 0; i < body.size(); ++i) out += (i ? ", " : "") + body[i];
    }
    return out + ".";
}

/// Safety: every variable in the head, the negative body or a builtin occurs
/// in a positive body atom.
inline std::set<std::string> unsafe_variables(const ProgramRule& r) {
    std::set<std::string> bound, out;
    for (const auto& a : r.positive) {
        for (const auto& t : a.args) {
            if (t.is_var()) bound.insert(t.var_name());
        }
    }
    auto check = [&](const Term& t) {
        if (t.is_var() && !bound.count(t.var_name())) out.insert(t.var_name());
    };
    for (const auto* atoms : {&r.head, &r.negative}) {
        for (const auto& a : *atoms) {
            for (const auto& t : a.args) check(t);
        }
    }
    for (const auto& b : r.builtins) {
        check(b.lhs);
        check(b.rhs);
    }
    return out;
}

struct LogicProgram {
    std::vector<ProgramRule> rules;
    /// program predicate name -> schema predicate name, for extraction
    std::map<std::string, std::string> schema_names;
    std::vector<std::string> warnings;

    std::size_t count(RuleKind k) const {
        std::size_t n = 0;
        for (const auto& r : rules) n += r.kind == k;
        return n;
    }

    std::vector<const ProgramRule*> of_kind(RuleKind k) const {
        std::vector<const ProgramRule*> out;
        for (const auto& r : rules) {
            if (r.kind == k) out.push_back(&r);
        }
        return out;
    }
};

struct EmitOptions {
    bool annotate_provenance = false;
};

/// Deterministic text in the DLV-style dialect read back by parse_program.
inline std::string emit_text(const LogicProgram& p, const EmitOptions& opts = {}) {
    std::string out;
    for (const auto& w : p.warnings) out += "% warning: " + w + "\n";
    for (const auto& r : p.rules) {
        if (opts.annotate_provenance && !r.provenance.empty()) {
            out += "% " + std::string(to_string(r.kind)) + " from " + r.provenance + "\n";
        }
        out += to_string(r) + "\n";
    }
    return out;
}

/// A variable-free atom of a ground program.
struct GroundAtom {
    std::string predicate;
    std::vector<Value> args;
    std::optional<Annotation> annotation;

    friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
    friend auto operator<=>(const GroundAtom& a, const GroundAtom& b) {
        if (auto c = a.predicate <=> b.predicate; c != 0) return c;
        if (auto c = std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
            c != 0) {
            return c;
        }
        if (a.annotation.has_value() != b.annotation.has_value()) {
            return a.annotation.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
        }
        if (!a.annotation) return std::strong_ordering::equal;
        return static_cast<int>(*a.annotation) <=> static_cast<int>(*b.annotation);
    }
};

inline std::string to_string(const GroundAtom& a) {
    std::string out = a.predicate;
    if (a.args.empty() && !a.annotation) return out;
    out += "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ",";
        out += program_constant(a.args[i]);
    }
    if (a.annotation) out += std::string(a.args.empty() ? "" : ",") + to_string(*a.annotation);
    return out + ")";
}

/// A stable model: a set of ground atoms in canonical order.
using StableModel = std::set<GroundAtom>;

namespace detail {

class ProgramParser {
public:
    explicit ProgramParser(std::string_view text) : cur_(text) {}

    LogicProgram parse() {
        LogicProgram p;
        while (!cur_.done()) p.rules.push_back(parse_rule());
        for (const auto& r : p.rules) {
            for (const auto* atoms : {&r.head, &r.positive, &r.negative}) {
                for (const auto& a : *atoms) {
                    if (a.annotation || (!a.predicate.empty() && a.predicate.back() == '_')) {
                        auto base = a.predicate;
                        if (!base.empty() && base.back() == '_') base.pop_back();
                        p.schema_names.emplace(a.predicate, base);
                    }
                }
            }
        }
        return p;
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

    ProgramAtom parse_atom() {
        auto name = cur_.expect(lex::Tok::Ident, "predicate name");
        if (is_variable_name(name.text)) throw ParseError("predicate names must start lowercase", name.line, name.column);
        ProgramAtom a{name.text, {}, std::nullopt};
        if (!cur_.accept(lex::Tok::LParen)) return a;
        std::vector<lex::Token> raw;
        std::vector<Term> args;
        do {
            raw.push_back(cur_.peek());
            args.push_back(parse_term());
        } while (cur_.accept(lex::Tok::Comma));
        cur_.expect(lex::Tok::RParen, "')'");
        const auto& last = raw.back();
        if (a.predicate.back() == '_' && last.kind == lex::Tok::Ident) {
            if (auto ann = parse_annotation(last.text)) {
                a.annotation = ann;
                args.pop_back();
            }
        }
        a.args = std::move(args);
        return a;
    }

    bool at_builtin() const {
        const auto& t = cur_.peek();
        if (t.kind == lex::Tok::Integer || t.kind == lex::Tok::String) return true;
        return t.kind == lex::Tok::Ident && cur_.peek(1).kind == lex::Tok::Op;
    }

    ProgramRule parse_rule() {
        ProgramRule r;
        if (!cur_.at(lex::Tok::If)) {
            r.head.push_back(parse_atom());
            while (cur_.at_ident("v") || cur_.at(lex::Tok::Pipe)) {
                cur_.next();
                r.head.push_back(parse_atom());
            }
        }
        if (cur_.accept(lex::Tok::If)) {
            do {
                if (cur_.at_ident("not") && cur_.peek(1).kind == lex::Tok::Ident) {
                    cur_.next();
                    r.negative.push_back(parse_atom());
                } else if (at_builtin()) {
                    auto lhs = parse_term();
                    auto op = lex::parse_op(cur_.expect(lex::Tok::Op, "comparison operator"));
                    auto rhs = parse_term();
                    r.builtins.push_back(BuiltinAtom{std::move(lhs), op, std::move(rhs)});
                } else {
                    r.positive.push_back(parse_atom());
                }
            } while (cur_.accept(lex::Tok::Comma));
        } else if (r.head.empty()) {
            cur_.fail("expected a rule");
        }
        auto dot = cur_.peek();
        cur_.expect(lex::Tok::Dot, "'.'");
        if (auto bad = unsafe_variables(r); !bad.empty()) {
            throw ParseError("unsafe rule: variable " + *bad.begin() + " not bound by a positive body atom", dot.line,
                             dot.column);
        }
        r.kind = r.is_fact() ? RuleKind::Fact : r.is_denial() ? RuleKind::Denial : RuleKind::Other;
        return r;
    }

    lex::Cursor cur_;
};

}  // namespace detail

/// Reads the dialect written by emit_text: `a v b :- c, not d, X != null.`,
/// Uppercase identifiers are variables, `%` comments.
inline LogicProgram parse_program(std::string_view text) { return detail::ProgramParser(text).parse(); }

}  // namespace nullcqa

#endif  // NULLCQA_PROGRAM_HPP
