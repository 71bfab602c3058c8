#pragma once

#include <stdexcept>
#include <string>

namespace natgrad {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// A catalogue constraint or a standing hypothesis ((H_g), (H_f)) is violated.
class ConstraintError : public Error {
public:
  using Error::Error;
};

/// Unreadable or malformed input document.
class InputError : public Error {
public:
  using Error::Error;
};

/// Query outside a tabulated range.
class RangeError : public Error {
public:
  RangeError(const std::string& what, double bound) : Error(what), bound_(bound) {}
  double bound() const { return bound_; }

private:
  double bound_;
};

/// Adaptive quadrature failed to reach its tolerance.
class QuadratureError : public Error {
public:
  using Error::Error;
};

/// A quantity left the representable double range.
class OverflowError : public Error {
public:
  OverflowError(const std::string& what, double at) : Error(what), at_(at) {}
  /// Argument at which the overflow was detected.
  double at() const { return at_; }

private:
  double at_;
};

/// Iterative solver did not converge.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

private:
  double last_residual_;
};

/// Mountain-pass geometry not found: no endpoint with negative energy.
class NoDescentDirection : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace natgrad
