#pragma once

#include <stdexcept>
#include <string>

namespace llrd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible input (bad pmf, alphabet mismatch, out-of-range
// distortion target, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations or lost numerical support.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The requested construction does not apply to this problem (e.g. no
// feasible tilt parameter for the single-parameter dual form).
class InapplicableError : public Error {
 public:
  using Error::Error;
};

}  // namespace llrd
