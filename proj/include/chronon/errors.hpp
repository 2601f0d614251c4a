#pragma once

#include <stdexcept>
#include <string>

namespace chronon {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: wrong dimensions, non-Hermitian matrices, tau <= 0, bad config.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  explicit ValidationError(const std::string& what) : Error(what) {}

  /// Name of the offending field, empty if not attributable.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Argument outside the mathematical domain of a formula (e.g. mass <= 0).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A simulation step failed (e.g. implicit solve did not converge).
class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace chronon
