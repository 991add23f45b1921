#pragma once

#include <span>
#include <vector>

#include "qosmimo/model.hpp"

namespace qosmimo {

struct AllocationOutcome {
  std::vector<int> set;
  std::vector<double> powers;  // watts, aligned with `set`
  double total = 0.0;
  double budget = 0.0;
  bool feasible = false;  // total <= budget
};

/// (2^R0 - 1)(sigma_w2 + I_k + eps2) / gain for one SU.
double qos_power(double rate_target, double sigma_w2, double rev_int, double eps2, double gain);

/// QoS-aware powers for every member of `set`. `gains` is aligned with `set`;
/// `rev_int` is indexed by SU. Throws InfinitePowerError on a zero gain.
AllocationOutcome qos_power(std::span<const int> set, std::span<const double> gains,
                            std::span<const double> rev_int, const NetworkConfig& config);

/// min(I0/eps1, P0); P0 when eps1 == 0.
double budget(const NetworkConfig& config);

/// lambda_k = gain_k / (sigma_w2 + I_k + eps2), aligned with `set`.
std::vector<double> equivalent_gain(std::span<const int> set, std::span<const double> gains,
                                    std::span<const double> rev_int, const NetworkConfig& config);

struct WaterFill {
  std::vector<double> powers;  // P_k = (mu - 1/lambda_k)^+
  double level = 0.0;          // mu
};

/// Sum-rate-optimal split of `budget` over parallel channels with gains `lambdas`.
/// Exact active-set solution: sort by 1/lambda, scan for the water level.
WaterFill waterfill(std::span<const double> lambdas, double budget);

/// log2(1 + P gain / (sigma_w2 + I_k + eps2)): the rate the SBS predicts from its estimates.
double estimated_rate(double power, double gain, double sigma_w2, double rev_int, double eps2);

/// sum_k log2(1 + P_k lambda_k).
double sum_rate(std::span<const double> powers, std::span<const double> lambdas);

}  // namespace qosmimo
