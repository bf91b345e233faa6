#pragma once

#include <stdexcept>
#include <string>

namespace pointerlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: unnormalized amplitudes, out-of-range parameters, malformed config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Operands of incompatible size (different unit counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Requested unit count exceeds the dense-storage budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An iterative method could not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// A limit extrapolation was refused because the fit does not support it.
class FitRefusal : public Error {
 public:
  using Error::Error;
};

}  // namespace pointerlab
