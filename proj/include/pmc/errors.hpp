#pragma once

#include <stdexcept>
#include <string>

namespace pmc {

enum class ErrorKind {
    NotWellDefined,
    InvalidPath,
    BudgetExceeded,
    StateCapExceeded,
    SizeCap,
    DataRace,
    GuardOverlap,
    OutOfDomain,
    DivisionByZero,
    TypeError,
    SyntaxError,
    UnknownVariable,
    MixedTerminalKinds,
    EncodingTooSmall,
    VariableClash,
    MissingWeight,
    NonConstantResidual,
    EvenN,
    Internal,
};

// All library failures surface as this exception; the kind is stable API,
// the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotWellDefined: return "not-well-defined";
        case ErrorKind::InvalidPath: return "invalid-path";
        case ErrorKind::BudgetExceeded: return "budget-exceeded";
        case ErrorKind::StateCapExceeded: return "state-cap-exceeded";
        case ErrorKind::SizeCap: return "size-cap";
        case ErrorKind::DataRace: return "data-race";
        case ErrorKind::GuardOverlap: return "guard-overlap";
        case ErrorKind::OutOfDomain: return "out-of-domain";
        case ErrorKind::DivisionByZero: return "division-by-zero";
        case ErrorKind::TypeError: return "type-error";
        case ErrorKind::SyntaxError: return "syntax-error";
        case ErrorKind::UnknownVariable: return "unknown-variable";
        case ErrorKind::MixedTerminalKinds: return "mixed-terminal-kinds";
        case ErrorKind::EncodingTooSmall: return "encoding-too-small";
        case ErrorKind::VariableClash: return "variable-clash";
        case ErrorKind::MissingWeight: return "missing-weight";
        case ErrorKind::NonConstantResidual: return "non-constant-residual";
        case ErrorKind::EvenN: return "even-n";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

} // namespace pmc
