#ifndef NULLCQA_ERROR_HPP
#define NULLCQA_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nullcqa {

enum class ErrorKind {
    Syntax,
    Schema,
    UnknownPredicate,
    InvalidConstraint,
    Evaluation,
    UnsafeQuery,
    ConflictingICSet,
    CyclicRICSet,
    UnsupportedConstraintForm,
    CandidateSpaceTooLarge,
    GroundingTooLarge,
    SearchCapExceeded,
    NotHCF,
    NoStableModels,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Syntax: return "syntax";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::UnknownPredicate: return "unknown_predicate";
        case ErrorKind::InvalidConstraint: return "invalid_constraint";
        case ErrorKind::Evaluation: return "evaluation";
        case ErrorKind::UnsafeQuery: return "unsafe_query";
        case ErrorKind::ConflictingICSet: return "conflicting_ic_set";
        case ErrorKind::CyclicRICSet: return "cyclic_ric_set";
        case ErrorKind::UnsupportedConstraintForm: return "unsupported_constraint_form";
        case ErrorKind::CandidateSpaceTooLarge: return "candidate_space_too_large";
        case ErrorKind::GroundingTooLarge: return "grounding_too_large";
        case ErrorKind::SearchCapExceeded: return "search_cap_exceeded";
        case ErrorKind::NotHCF: return "not_hcf";
        case ErrorKind::NoStableModels: return "no_stable_models";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Syntax error carrying a 1-based source location.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(ErrorKind::Syntax, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace nullcqa

#endif  // NULLCQA_ERROR_HPP
