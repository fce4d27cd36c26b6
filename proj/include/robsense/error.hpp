#pragma once

#include <stdexcept>
#include <string>

namespace robsense {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dimension (p, n) or an index is out of range.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// A parameter violates its documented domain (negative SNR, ν < 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed on a matrix required to be positive definite.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

/// The fixed-point iteration produced a numerically singular iterate.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Input does not satisfy an operation's precondition (e.g. n <= p for Tyler).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace robsense
