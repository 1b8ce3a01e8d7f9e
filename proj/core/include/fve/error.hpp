#pragma once

#include <stdexcept>
#include <string>

namespace fve {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to an operation (bad level pair, non-positive rate, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Kernel failed validation (non-finite quadrature, malformed table).
class KernelInvalid : public Error {
 public:
  using Error::Error;
};

/// Covariance not positive semidefinite beyond tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double offending_value)
      : Error(what), offending_value_(offending_value) {}
  double offending_value() const noexcept { return offending_value_; }

 private:
  double offending_value_;
};

/// Explicit scheme would be unstable at the requested step.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double suggested_dt)
      : Error(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

/// Configuration file or override is invalid; message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Monte Carlo run failed (too many discarded replicates, zero acceptances).
class RunFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace fve
