#pragma once

#include <stdexcept>
#include <string>

namespace lichnerowicz {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed grid, config, or file metadata.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (t <= 0, u <= 0, c <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Geometric data with a vanishing divisor (pi == 0 at a grid point).
class SingularDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An operation was called on data that fails its standing assumptions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// (A4) fails, so no constant supersolution is available.
class NoSupersolution : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Iteration budget exhausted.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A computed object failed its own post-check.
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

}  // namespace lichnerowicz
