#pragma once

#include <stdexcept>
#include <string>

namespace qvix {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: mismatched grids, violated preconditions, malformed parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear system that should have been nonsingular produced a zero pivot.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of iterations or stalled.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A sequence that must be monotone (by the comparison principle) was not.
class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace qvix
