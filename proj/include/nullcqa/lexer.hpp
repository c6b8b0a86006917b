#ifndef NULLCQA_LEXER_HPP
#define NULLCQA_LEXER_HPP

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nullcqa/error.hpp"
#include "nullcqa/value.hpp"

namespace nullcqa::lex {

enum class Tok {
    Ident,
    Integer,
    String,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Pipe,
    Slash,
    Arrow,   // ->
    LArrow,  // <-
    If,      // :-
    Op,      // = != < <= > >=
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

/// Shared tokenizer for facts, schemas, constraints, queries and programs.
/// `%` starts a comment running to end of line.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto emit = [&](Tok kind, std::size_t len) {
        out.push_back(Token{kind, std::string(src.substr(i, len)), line, col});
        advance(len);
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '%') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        auto peek = [&](std::size_t k) { return i + k < src.size() ? src[i + k] : '\0'; };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            emit(Tok::Ident, j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            std::size_t j = i + 1;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            emit(Tok::Integer, j - i);
            continue;
        }
        if (c == '"') {
            Token t{Tok::String, "", line, col};
            advance(1);
            bool closed = false;
            while (i < src.size()) {
                char d = src[i];
                if (d == '\\' && i + 1 < src.size()) {
                    t.text += src[i + 1];
                    advance(2);
                    continue;
                }
                advance(1);
                if (d == '"') {
                    closed = true;
                    break;
                }
                t.text += d;
            }
            if (!closed) throw ParseError("unterminated string literal", t.line, t.column);
            out.push_back(std::move(t));
            continue;
        }
        switch (c) {
            case '(': emit(Tok::LParen, 1); continue;
            case ')': emit(Tok::RParen, 1); continue;
            case ',': emit(Tok::Comma, 1); continue;
            case '.': emit(Tok::Dot, 1); continue;
            case '|': emit(Tok::Pipe, 1); continue;
            case '/': emit(Tok::Slash, 1); continue;
            case ':':
                if (peek(1) == '-') emit(Tok::If, 2);
                else emit(Tok::Colon, 1);
                continue;
            case '-':
                if (peek(1) == '>') {
                    emit(Tok::Arrow, 2);
                    continue;
                }
                break;
            case '<':
                if (peek(1) == '-') emit(Tok::LArrow, 2);
                else if (peek(1) == '=') emit(Tok::Op, 2);
                else emit(Tok::Op, 1);
                continue;
            case '>':
                emit(Tok::Op, peek(1) == '=' ? 2 : 1);
                continue;
            case '=':
                emit(Tok::Op, 1);
                continue;
            case '!':
                if (peek(1) == '=') {
                    emit(Tok::Op, 2);
                    continue;
                }
                break;
            default: break;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
}

/// Cursor over a token vector with the usual expect/accept helpers.
class Cursor {
public:
    explicit Cursor(std::string_view src) : toks_(tokenize(src)) {}

    const Token& peek(std::size_t k = 0) const {
        std::size_t at = pos_ + k;
        return at < toks_.size() ? toks_[at] : toks_.back();
    }
    bool at(Tok kind) const { return peek().kind == kind; }
    bool at_ident(std::string_view word) const { return at(Tok::Ident) && peek().text == word; }
    bool done() const { return at(Tok::End); }

    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    bool accept(Tok kind) {
        if (!at(kind)) return false;
        next();
        return true;
    }

    Token expect(Tok kind, const char* what) {
        if (!at(kind)) fail(std::string("expected ") + what);
        return next();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", found " + found, t.line, t.column);
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

inline CompareOp parse_op(const Token& t) {
    if (t.text == "=") return CompareOp::Eq;
    if (t.text == "!=") return CompareOp::Ne;
    if (t.text == "<") return CompareOp::Lt;
    if (t.text == "<=") return CompareOp::Le;
    if (t.text == ">") return CompareOp::Gt;
    if (t.text == ">=") return CompareOp::Ge;
    throw ParseError("unknown comparison operator '" + t.text + "'", t.line, t.column);
}

inline Value integer_value(const Token& t) {
    try {
        return Value::integer(std::stoll(t.text));
    } catch (const std::exception&) {
        throw ParseError("integer out of range", t.line, t.column);
    }
}

}  // namespace nullcqa::lex

#endif  // NULLCQA_LEXER_HPP
