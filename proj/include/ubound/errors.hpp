#pragma once

#include <stdexcept>
#include <string>

namespace ubound {

// Bad input: dimensions, parameter ranges, malformed configs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to converge or was rejected.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepError : public NumericalError {
 public:
  StepError(const std::string& what, double t, double residual)
      : NumericalError(what + " (t=" + std::to_string(t) + ", residual=" + std::to_string(residual) + ")"),
        t_(t),
        residual_(residual) {}

  double time() const { return t_; }
  double residual() const { return residual_; }

 private:
  double t_;
  double residual_;
};

class NoCertificateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Ultimate-bound estimate rejected: transient not dead or dt-refinement mismatch.
class NonStationaryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ShootingError : public NumericalError {
 public:
  ShootingError(const std::string& what, double residual)
      : NumericalError(what + " (residual=" + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace ubound
