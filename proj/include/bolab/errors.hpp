#pragma once

#include <stdexcept>
#include <string>

namespace bolab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factorization failed even after the jitter ladder was exhausted.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

/// GKLS regions could not be placed disjointly within the retry budget.
class InfeasibleGeometry : public Error {
 public:
  using Error::Error;
};

class InnerSolverFailure : public Error {
 public:
  using Error::Error;
};

/// Every dataset is concordant, so the conditional likelihood carries no information.
class AllDegenerate : public Error {
 public:
  using Error::Error;
};

class UnequalRunCounts : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `field()` holds the dotted path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace bolab
