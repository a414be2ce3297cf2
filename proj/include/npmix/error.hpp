#pragma once

#include <stdexcept>
#include <string>

namespace npmix {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance (or blended covariance) failed its Cholesky factorization.
class SingularModelError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument violates a documented precondition or type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Quadrature did not reach its tolerance. Carries the last error estimate.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double value, double error_estimate)
      : Error(what), value_(value), error_estimate_(error_estimate) {}

  double value() const { return value_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Every EM restart diverged.
class FitFailureError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace npmix
