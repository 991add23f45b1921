#pragma once

#include <complex>
#include <span>

namespace qosmimo {

/// One independent factor of a characteristic-function product: a Gamma
/// variable with shape `kappa` and signed scale `theta`. A negative scale
/// stands for the negation of a Gamma(kappa, |theta|) variable, which is how
/// (1 - C) P_p |h|^2 behaves when C > 1.
struct CfTerm {
  enum class Kind { kGammaPower, kUnitExponential };

  Kind kind = Kind::kUnitExponential;
  double theta = 0.0;
  double kappa = 1.0;  // always 1 for kUnitExponential

  static CfTerm gamma(double kappa, double theta) { return {Kind::kGammaPower, theta, kappa}; }
  static CfTerm exponential(double theta) { return {Kind::kUnitExponential, theta, 1.0}; }

  double mean() const { return kappa * theta; }
  double variance() const { return kappa * theta * theta; }
  /// E[exp(i t X)] = (1 - i theta t)^-kappa
  std::complex<double> cf(double t) const;
};

struct CdfEvaluation {
  double probability = 0.0;
  bool short_circuit = false;  // decided by a point mass or a Chernoff tail bound
  double error_estimate = 0.0;
};

/// Pr(sum of terms <= x) by Gil-Pelaez inversion of the product characteristic
/// function. Throws NumericError if the oscillatory integral does not reach
/// relative accuracy 1e-6.
CdfEvaluation cf_sum_cdf(std::span<const CfTerm> terms, double x);

}  // namespace qosmimo
