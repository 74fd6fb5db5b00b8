#pragma once

#include <stdexcept>
#include <string>

namespace ais {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (bad target spec, unresolvable tau rule, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, double estimate, double error_bound)
      : Error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// Non-finite density value or weight met while sampling.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Every proposal numerator is zero; the proposal cannot be normalized.
class DegenerateProposalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ais
