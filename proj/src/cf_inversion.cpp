#include "qosmimo/cf_inversion.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qosmimo/errors.hpp"

namespace qosmimo {

std::complex<double> CfTerm::cf(double t) const {
  return std::pow(std::complex<double>(1.0, -theta * t), -kappa);
}

namespace {

constexpr double kTailCutoff = 1e-13;
constexpr double kRelTol = 1e-6;

// log E[exp(u W)] for standardized terms; +inf outside the region of convergence.
double log_mgf(std::span<const CfTerm> terms, double u) {
  double s = 0.0;
  for (const auto& t : terms) {
    const double a = 1.0 - t.theta * u;
    if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
    s -= t.kappa * std::log(a);
  }
  return s;
}

// min over u in (0, u_hi) of log M(sign*u) - sign*u*x: the Chernoff exponent for the
// upper tail (sign=+1, Pr(W >= x)) or lower tail (sign=-1, Pr(W <= x)).
double chernoff_log_bound(std::span<const CfTerm> terms, double x, double sign) {
  double u_hi = 1e3;
  for (const auto& t : terms)
    if (sign * t.theta > 0.0) u_hi = std::min(u_hi, 1.0 / (sign * t.theta));
  u_hi *= 1.0 - 1e-9;
  auto h = [&](double u) { return log_mgf(terms, sign * u) - sign * u * x; };
  // Convex in u: golden-section search.
  constexpr double kPhi = 0.6180339887498949;
  double a = 0.0, b = u_hi;
  double c = b - kPhi * (b - a), d = a + kPhi * (b - a);
  double hc = h(c), hd = h(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * u_hi; ++it) {
    if (hc < hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - kPhi * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + kPhi * (b - a);
      hd = h(d);
    }
  }
  return std::min({hc, hd, 0.0});
}

}  // namespace

CdfEvaluation cf_sum_cdf(std::span<const CfTerm> input, double x) {
  std::vector<CfTerm> terms;
  double mean = 0.0, var = 0.0;
  for (const auto& t : input) {
    if (!(t.kappa > 0.0) || !std::isfinite(t.theta)) throw UsageError("cf_sum_cdf: invalid term");
    if (t.theta == 0.0) continue;
    terms.push_back(t);
    mean += t.mean();
    var += t.variance();
  }
  CdfEvaluation out;
  if (terms.empty()) {
    out.probability = x >= 0.0 ? 1.0 : 0.0;
    out.short_circuit = true;
    return out;
  }

  // Work in units of one standard deviation.
  const double sd = std::sqrt(var);
  for (auto& t : terms) t.theta /= sd;
  const double xs = x / sd;
  const double ms = mean / sd;

  const bool any_pos = std::any_of(terms.begin(), terms.end(), [](const CfTerm& t) { return t.theta > 0.0; });
  const bool any_neg = std::any_of(terms.begin(), terms.end(), [](const CfTerm& t) { return t.theta < 0.0; });
  if (!any_pos && xs >= 0.0) return {1.0, true, 0.0};
  if (!any_neg && xs <= 0.0) return {0.0, true, 0.0};
  if (xs > ms && std::exp(chernoff_log_bound(terms, xs, +1.0)) < kTailCutoff) return {1.0, true, kTailCutoff};
  if (xs < ms && std::exp(chernoff_log_bound(terms, xs, -1.0)) < kTailCutoff) return {0.0, true, kTailCutoff};

  auto phi = [&](double t) {
    std::complex<double> log_phi = 0.0;
    for (const auto& term : terms) log_phi -= term.kappa * std::log(std::complex<double>(1.0, -term.theta * t));
    return std::exp(log_phi);
  };

  // F(x) = 1/2 - (1/pi) int_0^inf Im[exp(-i t x) phi(t)] / t dt
  //      = 1/2 - (1/pi) [ int Im phi(t)/t cos(t x) dt - int Re phi(t)/t sin(t x) dt ].
  double integral = 0.0;
  double err = 0.0;
  if (xs == 0.0) {
    boost::math::quadrature::exp_sinh<double> integrator;
    double l1 = 0.0;
    integral = integrator.integrate([&](double t) { return phi(t).imag() / t; }, kRelTol * 1e-2, &err, &l1);
    err = err / std::max(std::abs(integral), 1e-300);
  } else {
    const double w = std::abs(xs);
    const double sgn = xs > 0.0 ? 1.0 : -1.0;
    boost::math::quadrature::ooura_fourier_cos<double> cos_int(kRelTol * 1e-2);
    boost::math::quadrature::ooura_fourier_sin<double> sin_int(kRelTol * 1e-2);
    const auto [ic, ec] = cos_int.integrate([&](double t) { return phi(t).imag() / t; }, w);
    const auto [is, es] = sin_int.integrate([&](double t) { return phi(t).real() / t; }, w);
    integral = ic - sgn * is;
    // Both pieces report relative error; express as absolute error on F.
    // A NaN estimate (Ooura on a near-zero integral) is replaced by the value itself.
    auto abs_err = [](double v, double rel) { return v == 0.0 ? 0.0 : std::abs(v) * (std::isnan(rel) ? 1.0 : rel); };
    err = (abs_err(ic, ec) + abs_err(is, es)) / M_PI;
    if (!(err <= kRelTol) && !(err <= kRelTol * std::abs(0.5 - integral / M_PI))) {
      throw NumericError("cf_sum_cdf: characteristic-function inversion did not converge (x=" + std::to_string(x) +
                         ", error estimate " + std::to_string(err) + ")");
    }
  }
  out.probability = std::clamp(0.5 - integral / M_PI, 0.0, 1.0);
  out.error_estimate = err;
  return out;
}

}  // namespace qosmimo
