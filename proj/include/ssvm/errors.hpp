#pragma once

#include <stdexcept>
#include <string>

namespace ssvm {

/// Misuse of the API: mismatched dimensions, invalid arguments, malformed files.
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: failed factorization, excess imaginary residue, overflow.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver blow-up, carrying the iteration at which it was detected.
struct DivergenceError : NumericalError {
  DivergenceError(const std::string& msg, int iter)
      : NumericalError(msg + " (iteration " + std::to_string(iter) + ")"), iteration(iter) {}
  int iteration;
};

/// Filesystem-level failure distinct from a malformed-content error.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ssvm
