#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

/// Raised when an input violates an operation's precondition
/// (mass outside (0, 8*pi), p <= 4, empty grid, CFL violation, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails: non-convergence, loss of
/// positivity, bracketing failure, failed factorization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kslab
