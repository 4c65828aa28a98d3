#pragma once

#include <stdexcept>
#include <string>

namespace coalflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given measure family.
class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

/// Quadrature, ODE or inversion routine failed to reach its tolerance.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A convergence verdict fell in the inconclusive band and the caller
/// did not supply an override.
class InconclusiveVerdict : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : Error(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace coalflow
