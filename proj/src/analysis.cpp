#include "qosmimo/analysis.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qosmimo/errors.hpp"

namespace qosmimo {

// ---------------------------------------------------------------------------
// PowerDistribution

PowerDistribution PowerDistribution::gamma(GammaParams p) {
  if (!(p.shape > 0.0) || !(p.scale > 0.0)) throw DomainError("Gamma parameters must be positive");
  PowerDistribution d;
  d.params_ = p;
  return d;
}

PowerDistribution PowerDistribution::point(double value) {
  PowerDistribution d;
  d.point_mass_ = true;
  d.value_ = value;
  return d;
}

PowerDistribution PowerDistribution::from_moments(double mean, double variance) {
  if (variance <= 0.0) return point(mean);
  return gamma({mean * mean / variance, variance / mean});
}

double PowerDistribution::mean() const { return point_mass_ ? value_ : params_.mean(); }

double PowerDistribution::variance() const { return point_mass_ ? 0.0 : params_.variance(); }

double PowerDistribution::cdf(double x) const {
  if (point_mass_) return x >= value_ ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(params_.shape, x / params_.scale);
}

double PowerDistribution::sf(double x) const {
  if (point_mass_) return x >= value_ ? 0.0 : 1.0;
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(params_.shape, x / params_.scale);
}

double PowerDistribution::pdf(double x) const {
  if (point_mass_) throw UsageError("pdf of a point mass");
  if (x < 0.0) return 0.0;
  return boost::math::gamma_p_derivative(params_.shape, x / params_.scale) / params_.scale;
}

double PowerDistribution::quantile(double u) const {
  if (point_mass_) return value_;
  return boost::math::gamma_p_inv(params_.shape, u) * params_.scale;
}

PowerDistribution PowerDistribution::scaled(double c) const {
  if (point_mass_) return point(value_ * c);
  return gamma({params_.shape, params_.scale * c});
}

// ---------------------------------------------------------------------------
// Fits

Theorem1Fit theorem1_params(int k, UpdateMode mode, int set_size, const NetworkConfig& config,
                            const Geometry& betas) {
  const int size = mode == UpdateMode::kWithUpdate ? set_size : config.K;
  const int dof = config.M - size - config.L + 1;
  if (dof < 1) throw UsageError("theorem1_params: M - |S| - L + 1 must be at least 1");
  if (k < 0 || k >= betas.K()) throw UsageError("theorem1_params: SU index out of range");

  double mean = config.sigma_w2 + config.eps2;
  double var = 0.0;
  for (int l = 0; l < betas.L(); ++l) {
    const double a = config.Pp * betas.pt_su(l, k);
    mean += a;
    var += a * a;
  }
  Theorem1Fit fit;
  fit.x = PowerDistribution::from_moments(mean, var);
  const double beta_k = betas.su_beta[static_cast<std::size_t>(k)];
  fit.gamma = (std::exp2(config.rate_target(k)) - 1.0) / ((beta_k + config.csi_error_su()) * dof);
  return fit;
}

PowerDistribution corollary1_sum_params(std::span<const PowerDistribution> members) {
  if (members.empty()) throw UsageError("corollary1_sum_params: empty member list");
  double mean = 0.0, var = 0.0;
  for (const auto& m : members) {
    mean += m.mean();
    var += m.variance();
  }
  return PowerDistribution::from_moments(mean, var);
}

double prob_feasible(std::span<const PowerDistribution> members, double budget) {
  if (members.empty()) return 1.0;
  return corollary1_sum_params(members).cdf(budget);
}

double prob_max(std::span<const PowerDistribution> members, std::span<const int> su_index, std::size_t j) {
  const std::size_t n = members.size();
  if (j >= n) throw UsageError("prob_max: member out of range");
  if (n == 1) return 1.0;
  const PowerDistribution& pj = members[j];

  if (pj.is_point_mass()) {
    const double v = pj.point_value();
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const auto& pi = members[i];
      if (pi.is_point_mass()) {
        const double w = pi.point_value();
        if (w > v || (w == v && su_index[i] > su_index[j])) return 0.0;
      } else {
        p *= pi.cdf(v);
      }
    }
    return p;
  }

  // Point-mass competitors contribute a step; start the integral past the largest one.
  double floor_x = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != j && members[i].is_point_mass()) floor_x = std::max(floor_x, members[i].point_value());
  if (floor_x > 0.0 && pj.sf(floor_x) == 0.0) return 0.0;

  // int_{floor}^inf pdf_j(x) prod_{i != j} F_i(x) dx, in units of the scale of j.
  const double scale = pj.params().scale;
  auto integrand = [&](double t) {
    const double x = t * scale;
    double p = pj.pdf(x) * scale;
    for (std::size_t i = 0; i < n && p > 0.0; ++i)
      if (i != j && !members[i].is_point_mass()) p *= members[i].cdf(x);
    return p;
  };
  double err = 0.0, l1 = 0.0;
  boost::math::quadrature::exp_sinh<double> integrator;
  const double value = integrator.integrate(integrand, floor_x / scale, std::numeric_limits<double>::infinity(), 1e-10,
                                            &err, &l1);
  if (!(err <= 1e-9) && !(err <= 1e-6 * std::abs(value))) {
    throw NumericError("prob_max: quadrature did not converge (value " + std::to_string(value) + ", error " +
                       std::to_string(err) + ", members " + std::to_string(n) + ")");
  }
  return std::clamp(value, 0.0, 1.0);
}

double prob_drop(std::span<const PowerDistribution> members, std::span<const int> su_index, std::size_t j,
                 double budget) {
  if (members.size() < 2) throw UsageError("prob_drop: needs at least two members");
  return (1.0 - prob_feasible(members, budget)) * prob_max(members, su_index, j);
}

// ---------------------------------------------------------------------------
// Subset recursion

unsigned set_to_mask(std::span<const int> set) {
  unsigned m = 0;
  for (int k : set) m |= 1u << k;
  return m;
}

std::vector<int> mask_to_set(unsigned mask) {
  std::vector<int> s;
  for (int k = 0; mask >> k; ++k)
    if (mask >> k & 1u) s.push_back(k);
  return s;
}

DmpAnalysis::DmpAnalysis(NetworkConfig config, Geometry betas, UpdateMode mode)
    : config_(std::move(config)), betas_(std::move(betas)), mode_(mode) {
  if (config_.K > kAnalysisMaxK) {
    throw UsageError("analysis: K=" + std::to_string(config_.K) + " exceeds the exact-recursion guard of " +
                     std::to_string(kAnalysisMaxK) + "; use the Monte Carlo harness for larger K");
  }
  if (betas_.K() != config_.K || betas_.L() != config_.L) throw UsageError("analysis: geometry does not match config");
  budget_ = config_.budget();
  fits_.resize(static_cast<std::size_t>(config_.K));
  for (int k = 0; k < config_.K; ++k) {
    auto& row = fits_[static_cast<std::size_t>(k)];
    if (mode_ == UpdateMode::kWithoutUpdate) {
      row.assign(1, theorem1_params(k, mode_, config_.K, config_, betas_).power());
    } else {
      for (int s = 1; s <= config_.K; ++s) row.push_back(theorem1_params(k, mode_, s, config_, betas_).power());
    }
  }
}

const PowerDistribution& DmpAnalysis::power(int k, int set_size) const {
  const auto& row = fits_.at(static_cast<std::size_t>(k));
  return mode_ == UpdateMode::kWithoutUpdate ? row.front() : row.at(static_cast<std::size_t>(set_size - 1));
}

std::vector<PowerDistribution> DmpAnalysis::powers(unsigned mask) const {
  const int size = std::popcount(mask);
  std::vector<PowerDistribution> out;
  for (int k : mask_to_set(mask)) out.push_back(power(k, size));
  return out;
}

void DmpAnalysis::compute_reach() const {
  if (reach_ready_) return;
  const unsigned full = (1u << config_.K) - 1u;
  f_.assign(full + 1u, 1.0);
  g_.assign(full + 1u, 0.0);
  for (unsigned m = 1; m <= full; ++m) f_[m] = prob_feasible(powers(m), budget_);

  std::vector<unsigned> order(full + 1u);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [](unsigned a, unsigned b) { return std::popcount(a) > std::popcount(b); });
  g_[full] = 1.0;
  for (unsigned m : order) {
    if (m == 0 || g_[m] == 0.0) continue;
    const double q = 1.0 - f_[m];
    if (q <= 0.0) continue;
    const auto members = powers(m);
    const auto idx = mask_to_set(m);
    for (std::size_t j = 0; j < idx.size(); ++j)
      g_[m & ~(1u << idx[j])] += g_[m] * q * prob_max(members, idx, j);
  }
  reach_ready_ = true;
}

double DmpAnalysis::feasible(unsigned mask) const {
  compute_reach();
  return f_.at(mask);
}

double DmpAnalysis::reach(unsigned mask) const {
  compute_reach();
  return g_.at(mask);
}

double DmpAnalysis::expected_selected() const {
  compute_reach();
  double e = 0.0;
  for (unsigned m = 1; m < f_.size(); ++m) e += std::popcount(m) * f_[m] * g_[m];
  return e;
}

double DmpAnalysis::expected_satisfied() const {
  compute_reach();
  double e = 0.0;
  for (unsigned m = 1; m < f_.size(); ++m) {
    const double w = f_[m] * g_[m];
    if (w < 1e-12) continue;  // below any reportable precision
    for (int k : mask_to_set(m)) e += w * rate_ccdf(k, m, config_.rate_target(k)).probability;
  }
  return e;
}

double DmpAnalysis::expected_interference_term(int k, unsigned mask) const {
  // E[P_k |Delta^H v_k|^2] = E[P_k] sigma_Delta^2 for a unit-norm v_k independent of Delta.
  return config_.csi_error_pr() * power(k, std::popcount(mask)).mean();
}

double DmpAnalysis::expected_interference(int l) const {
  if (l < 0 || l >= config_.L) throw UsageError("expected_interference: PR index out of range");
  compute_reach();
  double e = 0.0;
  for (unsigned m = 1; m < f_.size(); ++m) {
    const double w = f_[m] * g_[m];
    if (w == 0.0) continue;
    for (int k : mask_to_set(m)) e += w * expected_interference_term(k, m);
  }
  return e;
}

RateCcdf DmpAnalysis::rate_ccdf(int k, unsigned mask, double y) const {
  if (!(y > 0.0)) throw UsageError("rate_ccdf: rate threshold must be positive");
  if (!(mask >> k & 1u)) throw UsageError("rate_ccdf: SU not in set");
  const double beta_k = betas_.su_beta[static_cast<std::size_t>(k)];
  const double sd2 = config_.csi_error_su();
  RateCcdf out;
  out.c_y = beta_k / (beta_k + sd2) * (std::exp2(config_.rate_target(k)) - 1.0) / (std::exp2(y) - 1.0);
  out.zeta = out.c_y * (config_.sigma_w2 + config_.eps2) - config_.sigma_w2;

  if (sd2 == 0.0 && y == config_.rate_target(k)) {
    out.probability = 1.0;  // C_y = 1: every term vanishes and zeta = eps2 >= 0
    return out;
  }

  for (int l = 0; l < config_.L; ++l) {
    const double theta = (1.0 - out.c_y) * config_.Pp * betas_.pt_su(l, k);
    if (theta != 0.0) out.terms.push_back(CfTerm::exponential(theta));
  }
  // Residual inter-SU interference: sum over j != k of P_j |delta_k^H v_j|^2,
  // each a Gamma power times an Exp(sigma_delta^2) projection, moment-matched.
  const int size = std::popcount(mask);
  double zm = 0.0, zv = 0.0;
  for (int j : mask_to_set(mask)) {
    if (j == k) continue;
    const auto& pj = power(j, size);
    zm += sd2 * pj.mean();
    zv += sd2 * sd2 * (2.0 * pj.variance() + pj.mean() * pj.mean());
  }
  if (zm > 0.0 && zv > 0.0) out.terms.push_back(CfTerm::gamma(zm * zm / zv, zv / zm));

  out.negative_zeta_signed_terms =
      out.zeta < 0.0 && std::any_of(out.terms.begin(), out.terms.end(), [](const CfTerm& t) { return t.theta < 0.0; });
  out.probability = cf_sum_cdf(out.terms, out.zeta).probability;
  return out;
}

// ---------------------------------------------------------------------------
// Free-function entry points

double reach_prob(std::span<const int> set, const NetworkConfig& config, const Geometry& betas, UpdateMode mode) {
  return DmpAnalysis(config, betas, mode).reach(set_to_mask(set));
}

double expected_selected(const NetworkConfig& config, const Geometry& betas, UpdateMode mode) {
  return DmpAnalysis(config, betas, mode).expected_selected();
}

double expected_satisfied(const NetworkConfig& config, const Geometry& betas, UpdateMode mode) {
  return DmpAnalysis(config, betas, mode).expected_satisfied();
}

double expected_interference(int l, const NetworkConfig& config, const Geometry& betas, UpdateMode mode) {
  return DmpAnalysis(config, betas, mode).expected_interference(l);
}

RateCcdf rate_ccdf(int k, std::span<const int> set, double y, const NetworkConfig& config, const Geometry& betas,
                   UpdateMode mode) {
  return DmpAnalysis(config, betas, mode).rate_ccdf(k, set_to_mask(set), y);
}

double dominance_cdf_gap(int k, std::span<const int> set1, std::span<const int> set2, double x,
                         const NetworkConfig& config, const Geometry& betas) {
  const unsigned m1 = set_to_mask(set1);
  const unsigned m2 = set_to_mask(set2);
  if ((m2 & ~m1) != 0u || m1 == m2) throw UsageError("dominance_cdf_gap: set2 must be a strict subset of set1");
  if (!(m2 >> k & 1u)) throw UsageError("dominance_cdf_gap: SU must belong to both sets");
  const auto p1 = theorem1_params(k, UpdateMode::kWithUpdate, static_cast<int>(set1.size()), config, betas).power();
  const auto p2 = theorem1_params(k, UpdateMode::kWithUpdate, static_cast<int>(set2.size()), config, betas).power();
  return p1.sf(x) - p2.sf(x);
}

}  // namespace qosmimo
