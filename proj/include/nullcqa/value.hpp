#ifndef NULLCQA_VALUE_HPP
#define NULLCQA_VALUE_HPP

#include <cctype>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "nullcqa/error.hpp"

namespace nullcqa {

/// A domain constant: the single distinguished null, an integer, or a symbol.
///
/// Equality is syntactic (null == null). The total order places null first,
/// then integers numerically, then symbols lexicographically; every
/// deterministic output in the library is sorted by it.
class Value {
public:
    Value() = default;

    static Value null() { return Value{}; }
    static Value integer(std::int64_t v) { return Value{Repr{v}}; }
    static Value symbol(std::string s) { return Value{Repr{std::move(s)}}; }

    bool is_null() const noexcept { return std::holds_alternative<std::monostate>(repr_); }
    bool is_integer() const noexcept { return std::holds_alternative<std::int64_t>(repr_); }
    bool is_symbol() const noexcept { return std::holds_alternative<std::string>(repr_); }

    std::int64_t as_integer() const { return std::get<std::int64_t>(repr_); }
    const std::string& as_symbol() const { return std::get<std::string>(repr_); }

    friend bool operator==(const Value&, const Value&) = default;
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
        if (a.repr_.index() != b.repr_.index()) {
            return a.repr_.index() <=> b.repr_.index();
        }
        if (a.is_integer()) return a.as_integer() <=> b.as_integer();
        if (a.is_symbol()) return a.as_symbol().compare(b.as_symbol()) <=> 0;
        return std::strong_ordering::equal;
    }

private:
    using Repr = std::variant<std::monostate, std::int64_t, std::string>;
    explicit Value(Repr r) : repr_(std::move(r)) {}
    Repr repr_;
};

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

inline std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

/// Renders a value in fact syntax: bare identifiers stay bare, anything else
/// that is a symbol gets double quotes.
inline std::string to_string(const Value& v) {
    if (v.is_null()) return "null";
    if (v.is_integer()) return std::to_string(v.as_integer());
    const auto& s = v.as_symbol();
    if (is_identifier(s) && s != "null") return s;
    return quote(s);
}

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

inline CompareOp negate(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return CompareOp::Ne;
        case CompareOp::Ne: return CompareOp::Eq;
        case CompareOp::Lt: return CompareOp::Ge;
        case CompareOp::Le: return CompareOp::Gt;
        case CompareOp::Gt: return CompareOp::Le;
        case CompareOp::Ge: return CompareOp::Lt;
    }
    return op;
}

/// Builtin comparison. `=` and `!=` are syntactic and total. Ordering
/// comparisons are false when either side is null, numeric on two integers,
/// lexicographic on two symbols, and an Evaluation error when mixed.
inline bool compare(CompareOp op, const Value& a, const Value& b) {
    if (op == CompareOp::Eq) return a == b;
    if (op == CompareOp::Ne) return a != b;
    if (a.is_null() || b.is_null()) return false;
    if (a.is_integer() != b.is_integer()) {
        throw Error(ErrorKind::Evaluation,
                    "cannot order-compare " + to_string(a) + " with " + to_string(b));
    }
    auto c = a <=> b;
    switch (op) {
        case CompareOp::Lt: return c < 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Gt: return c > 0;
        case CompareOp::Ge: return c >= 0;
        default: return false;
    }
}

}  // namespace nullcqa

#endif  // NULLCQA_VALUE_HPP
