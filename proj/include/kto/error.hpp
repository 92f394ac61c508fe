#pragma once

#include <stdexcept>
#include <string>

namespace kto {

// Every failure the library reports carries one of these kinds so the CLI can
// map it onto an exit code without string matching.
enum class ErrorKind {
    Dimension,
    NumericalFailure,
    InvalidPolynomial,
    DegenerateSystem,
    BoundaryZero,
    UnstablePlant,
    TransformationFailure,
    HyperbolicityViolation,
    Capability,
    Divergence,
    Range,
    Contract,
    SingularGain,
    Validation,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension error";
        case ErrorKind::NumericalFailure: return "numerical failure";
        case ErrorKind::InvalidPolynomial: return "invalid polynomial";
        case ErrorKind::DegenerateSystem: return "degenerate system";
        case ErrorKind::BoundaryZero: return "boundary zero";
        case ErrorKind::UnstablePlant: return "unstable plant";
        case ErrorKind::TransformationFailure: return "transformation failure";
        case ErrorKind::HyperbolicityViolation: return "hyperbolicity violation";
        case ErrorKind::Capability: return "capability error";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::Range: return "range error";
        case ErrorKind::Contract: return "contract error";
        case ErrorKind::SingularGain: return "singular gain";
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    // Violations of the plant assumptions (hyperbolic zeros, stable poles,
    // well-defined relative degree).
    [[nodiscard]] bool is_assumption_violation() const noexcept {
        return kind_ == ErrorKind::BoundaryZero || kind_ == ErrorKind::UnstablePlant ||
               kind_ == ErrorKind::HyperbolicityViolation || kind_ == ErrorKind::DegenerateSystem;
    }

private:
    ErrorKind kind_;
};

}  // namespace kto
