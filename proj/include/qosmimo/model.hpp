#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qosmimo {

/// How per-SU rate targets are produced for each location realization.
enum class RateTargetMode {
  kFixed,    // use NetworkConfig::R0 as given
  kUniform,  // draw each R0_k uniformly on (0, r0_max] per location
};

/// Scenario parameters. Every power is in linear watts; rates in bits/s/Hz.
struct NetworkConfig {
  int M = 128;  // SBS antennas
  int K = 20;   // secondary users
  int L = 4;    // primary transmitter/receiver pairs

  double P0 = 10.0;        // SBS power budget
  double Pp = 0.1;         // per-PT transmit power
  double I0 = 2.5118864315095823e-14;  // interference threshold (-106 dBm)
  double sigma_w2 = 1e-13;             // noise power (-100 dBm)

  /// Per-SU targets, length K (a scalar in JSON is broadcast on load).
  std::vector<double> R0 = std::vector<double>(20, 1.0);
  RateTargetMode r0_mode = RateTargetMode::kFixed;
  double r0_max = 4.0;

  double eps1 = 1e-12;  // interference margin
  double eps2 = 1e-13;  // rate margin (watts)

  /// Channel-estimation error variances. Unset means the TDD reciprocity
  /// model: sigma_w2 / P0 for SU links and sigma_w2 / Pp for PR links.
  std::optional<double> sigma_delta2;
  std::optional<double> sigma_Delta2;

  double cell_radius_m = 2000.0;
  double min_distance_m = 100.0;
  double pathloss_exp = 3.8;
  double pathloss_ref_gain = 1.0;  // beta = ref_gain * rho * d^-exp, d in meters
  double shadow_sigma_db = 8.0;

  std::uint64_t seed = 1;

  /// Optional fixed slow-fading gains replacing the random drop; all three
  /// empty means random geometry. Sizes K, L*K (row-major) and L.
  std::vector<double> fixed_su_beta;
  std::vector<double> fixed_pt_su_beta;
  std::vector<double> fixed_pr_beta;

  bool has_fixed_geometry() const {
    return !fixed_su_beta.empty() || !fixed_pt_su_beta.empty() || !fixed_pr_beta.empty();
  }

  double csi_error_su() const;  // sigma_delta^2
  double csi_error_pr() const;  // sigma_Delta^2
  double budget() const;        // min(I0/eps1, P0), P0 when eps1 == 0
  double rate_target(int k) const { return R0.at(static_cast<std::size_t>(k)); }
};

/// Slow-fading coefficients for one location realization.
struct Geometry {
  std::vector<double> su_beta;     // beta_k, length K
  std::vector<double> pt_su_beta;  // beta_lk, row-major L x K
  std::vector<double> pr_beta;     // beta_l0, length L

  struct Point {
    double x = 0.0;
    double y = 0.0;
  };
  std::vector<Point> su_pos;
  std::vector<Point> pt_pos;
  std::vector<Point> pr_pos;

  int K() const { return static_cast<int>(su_beta.size()); }
  int L() const { return static_cast<int>(pr_beta.size()); }
  double pt_su(int l, int k) const {
    return pt_su_beta[static_cast<std::size_t>(l) * su_beta.size() + static_cast<std::size_t>(k)];
  }
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Every violated invariant, one message each. Empty means valid.
std::vector<std::string> validate(const NetworkConfig& config);

/// Throws ConfigError listing every violation.
void require_valid(const NetworkConfig& config);

struct Margins {
  double eps1 = 0.0;
  double eps2 = 0.0;
};

/// eps1 = sigma_Delta^2 = sigma_w2/Pp and eps2 = P0 * sigma_delta^2 = sigma_w2.
Margins default_margins(const NetworkConfig& config);

}  // namespace qosmimo
