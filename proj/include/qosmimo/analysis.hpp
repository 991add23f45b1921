#pragma once

#include <span>
#include <vector>

#include "qosmimo/cf_inversion.hpp"
#include "qosmimo/model.hpp"

namespace qosmimo {

/// Gamma(shape, scale): mean shape*scale, variance shape*scale^2.
struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;

  double mean() const { return shape * scale; }
  double variance() const { return shape * scale * scale; }
};

/// A non-negative random quantity modelled either as a Gamma variable or as a
/// point mass (the degenerate fit when no primary transmitter contributes).
class PowerDistribution {
 public:
  static PowerDistribution gamma(GammaParams p);
  static PowerDistribution point(double value);
  /// Gamma fit matching the given moments; a point mass when variance is 0.
  static PowerDistribution from_moments(double mean, double variance);

  bool is_point_mass() const { return point_mass_; }
  const GammaParams& params() const { return params_; }
  double point_value() const { return value_; }

  double mean() const;
  double variance() const;
  double cdf(double x) const;
  double sf(double x) const;
  double pdf(double x) const;
  double quantile(double u) const;
  /// Same shape, scale multiplied by c (> 0).
  PowerDistribution scaled(double c) const;

 private:
  bool point_mass_ = false;
  GammaParams params_{};
  double value_ = 0.0;
};

enum class UpdateMode {
  kWithUpdate,     // beams recomputed for the current set: |S| - 1 + L nulls
  kWithoutUpdate,  // beams of the full set: K - 1 + L nulls
};

/// Fit of the QoS power of one SU: P = gamma * X with X = sigma_w2 + I_k + eps2.
struct Theorem1Fit {
  PowerDistribution x;  // X; a point mass when L = 0
  double gamma = 0.0;   // (2^R0 - 1) / ((beta_k + sigma_delta^2)(M - |S| - L + 1))

  bool point_mass() const { return x.is_point_mass(); }
  PowerDistribution power() const { return x.scaled(gamma); }
};

/// `set_size` is |S| for kWithUpdate and ignored (K is used) for kWithoutUpdate.
Theorem1Fit theorem1_params(int k, UpdateMode mode, int set_size, const NetworkConfig& config,
                            const Geometry& betas);

/// Moment-matched Gamma for the sum of independent members.
PowerDistribution corollary1_sum_params(std::span<const PowerDistribution> members);

/// f(S) = Pr(sum of member powers <= budget).
double prob_feasible(std::span<const PowerDistribution> members, double budget);

/// Pr(member `j` holds the largest power) = int pdf_j(x) prod_{i != j} cdf_i(x) dx.
/// `su_index` gives the SU number of each member for tie-breaking between point masses.
double prob_max(std::span<const PowerDistribution> members, std::span<const int> su_index, std::size_t j);

/// P'(S+ \ {j}) = (1 - f(S+)) Pr(member j holds the largest power).
double prob_drop(std::span<const PowerDistribution> members, std::span<const int> su_index, std::size_t j,
                 double budget);

/// Largest K accepted by the subset recursions.
inline constexpr int kAnalysisMaxK = 10;

struct RateCcdf {
  double probability = 0.0;
  double c_y = 0.0;
  double zeta = 0.0;
  /// zeta < 0 while some term has negative scale: a regime the closed form does not discuss.
  bool negative_zeta_signed_terms = false;
  std::vector<CfTerm> terms;
};

/// Closed-form predictions of the DMP algorithm for one location (fixed betas).
///
/// Subsets are bit masks over the K SUs. f, g and the per-SU fits are memoized;
/// construction throws UsageError above kAnalysisMaxK.
class DmpAnalysis {
 public:
  DmpAnalysis(NetworkConfig config, Geometry betas, UpdateMode mode);

  int K() const { return config_.K; }
  UpdateMode mode() const { return mode_; }

  const PowerDistribution& power(int k, int set_size) const;
  std::vector<PowerDistribution> powers(unsigned mask) const;

  double feasible(unsigned mask) const;  // f(S)
  double reach(unsigned mask) const;     // g(S)

  double expected_selected() const;               // E[K*]
  double expected_satisfied() const;              // E[K**]
  double expected_interference(int l) const;      // E[I_l]
  double expected_interference_term(int k, unsigned mask) const;  // E[I_kl]

  /// Pr(R_k^S >= y) for k in `mask`.
  RateCcdf rate_ccdf(int k, unsigned mask, double y) const;

 private:
  void compute_reach() const;

  NetworkConfig config_;
  Geometry betas_;
  UpdateMode mode_;
  double budget_;
  std::vector<std::vector<PowerDistribution>> fits_;  // [k][set_size]
  mutable std::vector<double> f_;
  mutable std::vector<double> g_;
  mutable bool reach_ready_ = false;
};

unsigned set_to_mask(std::span<const int> set);
std::vector<int> mask_to_set(unsigned mask);

double reach_prob(std::span<const int> set, const NetworkConfig& config, const Geometry& betas, UpdateMode mode);
double expected_selected(const NetworkConfig& config, const Geometry& betas, UpdateMode mode);
double expected_satisfied(const NetworkConfig& config, const Geometry& betas, UpdateMode mode);
double expected_interference(int l, const NetworkConfig& config, const Geometry& betas, UpdateMode mode);
RateCcdf rate_ccdf(int k, std::span<const int> set, double y, const NetworkConfig& config, const Geometry& betas,
                   UpdateMode mode);

/// Pr(P_k^{S1} >= x) - Pr(P_k^{S2} >= x) under the with-update fit, S2 a strict subset of S1.
double dominance_cdf_gap(int k, std::span<const int> set1, std::span<const int> set2, double x,
                         const NetworkConfig& config, const Geometry& betas);

}  // namespace qosmimo
