#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qosmimo {

/// Bad numeric input to a conversion or formula (non-positive power, etc.).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated an API precondition (index not in set, guard exceeded).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature or inversion failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file or override could not be parsed or is invalid.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The stacked channel matrix for a candidate set is (numerically) rank deficient.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(std::vector<int> set, double condition);

  const std::vector<int>& set() const noexcept { return set_; }
  double condition() const noexcept { return condition_; }

 private:
  std::vector<int> set_;
  double condition_;
};

/// A required power is infinite because the effective gain is zero.
class InfinitePowerError : public DomainError {
 public:
  explicit InfinitePowerError(int su);
  int su() const noexcept { return su_; }

 private:
  int su_;
};

}  // namespace qosmimo
