#pragma once

#include <stdexcept>
#include <string>

namespace credo {

// Base class for all pipeline errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape mismatch in a matrix/vector operation or port wiring.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Singular or numerically unusable matrix.
struct SingularMatrixError : Error {
    explicit SingularMatrixError(const std::string& msg) : Error(msg) {}
};

// Iterative solver failed to converge (carries the last residual in the message).
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

// Spectral radius >= 1 where a stable matrix was required.
struct InstabilityError : Error {
    explicit InstabilityError(const std::string& msg) : Error(msg) {}
};

// Evaluation hit a physical singularity (wheel speed, slip floor, zero speed).
struct SingularityError : Error {
    explicit SingularityError(const std::string& msg) : Error(msg) {}
};

// Non-finite value where a finite one was required.
struct NonFiniteError : Error {
    explicit NonFiniteError(const std::string& msg) : Error(msg) {}
};

// Closed-loop integration failed (singularity or non-finite state).
struct IntegrationError : Error {
    explicit IntegrationError(const std::string& msg) : Error(msg) {}
};

// Malformed model / expression / vc text.
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Structurally invalid model or program (failed validation invariant).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

}  // namespace credo
