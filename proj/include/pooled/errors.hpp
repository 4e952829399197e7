#pragma once

#include <stdexcept>
#include <string>

namespace pooled {

// Precondition violations surface as std::invalid_argument. The types below
// mark failures the CLI maps to their own exit codes.

/// Enumeration of B(pi) would exceed the candidate guard.
class GuardExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature did not reach its error target.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No candidate explains the observations (corrupted noiseless input).
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pooled
