#ifndef NULLCQA_RELATIONAL_HPP
#define NULLCQA_RELATIONAL_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <ranges>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nullcqa/error.hpp"
#include "nullcqa/lexer.hpp"
#include "nullcqa/value.hpp"

namespace nullcqa {

struct PredicateDecl {
    std::size_t arity = 0;
    std::vector<std::string> attributes;  // may be empty; then positions are 1..arity

    friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

/// Database predicates with their arities. Positions R[i] are 1-based.
class Schema {
public:
    void declare(const std::string& name, std::size_t arity, std::vector<std::string> attributes = {}) {
        if (arity == 0) throw Error(ErrorKind::Schema, "predicate " + name + " must have arity >= 1");
        if (!attributes.empty() && attributes.size() != arity) {
            throw Error(ErrorKind::Schema, "predicate " + name + ": attribute list does not match arity");
        }
        auto [it, inserted] = preds_.try_emplace(name, PredicateDecl{arity, std::move(attributes)});
        if (!inserted && it->second.arity != arity) {
            throw Error(ErrorKind::Schema, "predicate " + name + " declared with arity " +
                                               std::to_string(it->second.arity) + " and " +
                                               std::to_string(arity));
        }
    }

    bool contains(std::string_view name) const { return preds_.find(std::string(name)) != preds_.end(); }

    std::size_t arity(std::string_view name) const {
        auto it = preds_.find(std::string(name));
        if (it == preds_.end()) throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + std::string(name));
        return it->second.arity;
    }

    bool valid_position(std::string_view name, std::size_t pos) const {
        auto it = preds_.find(std::string(name));
        return it != preds_.end() && pos >= 1 && pos <= it->second.arity;
    }

    const std::map<std::string, PredicateDecl>& predicates() const { return preds_; }
    bool empty() const { return preds_.empty(); }

    void merge(const Schema& other) {
        for (const auto& [name, decl] : other.preds_) declare(name, decl.arity, decl.attributes);
    }

    friend bool operator==(const Schema&, const Schema&) = default;

private:
    std::map<std::string, PredicateDecl> preds_;
};

/// A ground database atom R(c1, ..., cn).
struct Atom {
    std::string predicate;
    std::vector<Value> args;

    bool has_null() const {
        for (const auto& v : args) {
            if (v.is_null()) return true;
        }
        return false;
    }

    friend bool operator==(const Atom&, const Atom&) = default;
    friend auto operator<=>(const Atom& a, const Atom& b) {
        if (auto c = a.predicate <=> b.predicate; c != 0) return c;
        return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                      b.args.end());
    }
};

inline std::string to_string(const Atom& a) {
    std::string out = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ",";
        out += to_string(a.args[i]);
    }
    return out + ")";
}

/// A finite set of ground atoms; duplicates collapse on insert.
class Instance {
public:
    using const_iterator = std::set<Atom>::const_iterator;

    Instance() = default;
    Instance(std::initializer_list<Atom> atoms) : atoms_(atoms) {}
    template <std::ranges::input_range R>
    explicit Instance(const R& atoms) : atoms_(std::ranges::begin(atoms), std::ranges::end(atoms)) {}

    bool insert(Atom a) { return atoms_.insert(std::move(a)).second; }
    bool erase(const Atom& a) { return atoms_.erase(a) > 0; }
    bool contains(const Atom& a) const { return atoms_.count(a) > 0; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    const_iterator begin() const { return atoms_.begin(); }
    const_iterator end() const { return atoms_.end(); }
    const std::set<Atom>& atoms() const { return atoms_; }

    /// Atoms of one predicate, in canonical order.
    auto atoms_of(const std::string& predicate) const {
        auto lo = atoms_.lower_bound(Atom{predicate, {}});
        auto hi = lo;
        while (hi != atoms_.end() && hi->predicate == predicate) ++hi;
        return std::ranges::subrange(lo, hi);
    }

    std::set<Value> values() const {
        std::set<Value> out;
        for (const auto& a : atoms_) out.insert(a.args.begin(), a.args.end());
        return out;
    }

    bool has_null() const {
        for (const auto& a : atoms_) {
            if (a.has_null()) return true;
        }
        return false;
    }

    bool subset_of(const Instance& other) const {
        return std::ranges::includes(other.atoms_, atoms_);
    }

    friend bool operator==(const Instance&, const Instance&) = default;
    friend auto operator<=>(const Instance& a, const Instance& b) {
        return std::lexicographical_compare_three_way(a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(),
                                                      b.atoms_.end());
    }

private:
    std::set<Atom> atoms_;
};

/// Facts grammar rendering: one `pred(args).` per line, canonical order.
inline std::string render_instance(const Instance& d) {
    std::string out;
    for (const auto& a : d) out += to_string(a) + ".\n";
    return out;
}

inline std::string to_string(const Instance& d) {
    std::string out = "{";
    bool first = true;
    for (const auto& a : d) {
        if (!first) out += ", ";
        first = false;
        out += to_string(a);
    }
    return out + "}";
}

namespace detail {

inline Value parse_fact_value(lex::Cursor& cur) {
    const auto& t = cur.peek();
    switch (t.kind) {
        case lex::Tok::Integer: return lex::integer_value(cur.next());
        case lex::Tok::String: return Value::symbol(cur.next().text);
        case lex::Tok::Ident: {
            auto tok = cur.next();
            if (tok.text == "null") return Value::null();
            return Value::symbol(tok.text);
        }
        default: cur.fail("expected a constant");
    }
}

}  // namespace detail

/// Parses `pred(arg, ..., arg).` statements. When `schema` is non-empty every
/// fact is checked against it; otherwise arities only need to agree with each
/// other.
inline Instance parse_instance(std::string_view text, const Schema& schema = {}) {
    lex::Cursor cur(text);
    Instance d;
    std::map<std::string, std::size_t> seen;
    while (!cur.done()) {
        auto name = cur.expect(lex::Tok::Ident, "predicate name");
        cur.expect(lex::Tok::LParen, "'('");
        Atom a{name.text, {}};
        if (!cur.at(lex::Tok::RParen)) {
            a.args.push_back(detail::parse_fact_value(cur));
            while (cur.accept(lex::Tok::Comma)) a.args.push_back(detail::parse_fact_value(cur));
        }
        cur.expect(lex::Tok::RParen, "')'");
        cur.expect(lex::Tok::Dot, "'.'");
        if (!schema.empty()) {
            if (!schema.contains(a.predicate)) {
                throw ParseError("unknown predicate " + a.predicate, name.line, name.column);
            }
            if (schema.arity(a.predicate) != a.args.size()) {
                throw ParseError("arity mismatch for " + a.predicate + ": expected " +
                                     std::to_string(schema.arity(a.predicate)) + ", got " +
                                     std::to_string(a.args.size()),
                                 name.line, name.column);
            }
        } else {
            if (a.args.empty()) throw ParseError("facts need at least one argument", name.line, name.column);
            auto [it, fresh] = seen.try_emplace(a.predicate, a.args.size());
            if (!fresh && it->second != a.args.size()) {
                throw ParseError("arity mismatch for " + a.predicate, name.line, name.column);
            }
        }
        d.insert(std::move(a));
    }
    return d;
}

/// Schema file: `R/2.` declarations, or `R(id, name).` to name attributes.
/// The trailing dot is optional.
inline Schema parse_schema(std::string_view text) {
    lex::Cursor cur(text);
    Schema s;
    while (!cur.done()) {
        auto name = cur.expect(lex::Tok::Ident, "predicate name");
        try {
            if (cur.accept(lex::Tok::Slash)) {
                auto n = cur.expect(lex::Tok::Integer, "arity");
                auto arity = std::stoll(n.text);
                if (arity < 1) throw Error(ErrorKind::Schema, "arity must be >= 1");
                s.declare(name.text, static_cast<std::size_t>(arity));
            } else {
                cur.expect(lex::Tok::LParen, "'/' or '('");
                std::vector<std::string> attrs;
                attrs.push_back(cur.expect(lex::Tok::Ident, "attribute name").text);
                while (cur.accept(lex::Tok::Comma)) attrs.push_back(cur.expect(lex::Tok::Ident, "attribute name").text);
                cur.expect(lex::Tok::RParen, "')'");
                auto n = attrs.size();
                s.declare(name.text, n, std::move(attrs));
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), name.line, name.column);
        }
        cur.accept(lex::Tok::Dot);
    }
    return s;
}

inline Schema infer_schema(const Instance& d) {
    Schema s;
    for (const auto& a : d) s.declare(a.predicate, a.args.size());
    return s;
}

inline std::string render_schema(const Schema& s) {
    std::string out;
    for (const auto& [name, decl] : s.predicates()) out += name + "/" + std::to_string(decl.arity) + ".\n";
    return out;
}

/// Throws Schema errors for atoms that do not conform.
inline void check_conforms(const Instance& d, const Schema& s) {
    for (const auto& a : d) {
        if (!s.contains(a.predicate)) throw Error(ErrorKind::UnknownPredicate, "unknown predicate " + a.predicate);
        if (s.arity(a.predicate) != a.args.size()) {
            throw Error(ErrorKind::Schema, "atom " + to_string(a) + " does not match arity " +
                                               std::to_string(s.arity(a.predicate)));
        }
    }
}

}  // namespace nullcqa

#endif  // NULLCQA_RELATIONAL_HPP
