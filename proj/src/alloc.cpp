#include "qosmimo/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qosmimo/errors.hpp"

namespace qosmimo {

double qos_power(double rate_target, double sigma_w2, double rev_int, double eps2, double gain) {
  return (std::exp2(rate_target) - 1.0) * (sigma_w2 + rev_int + eps2) / gain;
}

AllocationOutcome qos_power(std::span<const int> set, std::span<const double> gains,
                            std::span<const double> rev_int, const NetworkConfig& config) {
  if (gains.size() != set.size()) throw UsageError("qos_power: gains must align with set");
  AllocationOutcome out;
  out.set.assign(set.begin(), set.end());
  out.powers.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const int k = set[i];
    if (!(gains[i] > 0.0)) throw InfinitePowerError(k);
    out.powers.push_back(qos_power(config.rate_target(k), config.sigma_w2, rev_int[static_cast<std::size_t>(k)],
                                   config.eps2, gains[i]));
  }
  out.total = std::accumulate(out.powers.begin(), out.powers.end(), 0.0);
  out.budget = budget(config);
  out.feasible = out.total <= out.budget;
  return out;
}

double budget(const NetworkConfig& config) { return config.budget(); }

std::vector<double> equivalent_gain(std::span<const int> set, std::span<const double> gains,
                                    std::span<const double> rev_int, const NetworkConfig& config) {
  if (gains.size() != set.size()) throw UsageError("equivalent_gain: gains must align with set");
  std::vector<double> lambda(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    lambda[i] = gains[i] / (config.sigma_w2 + rev_int[static_cast<std::size_t>(set[i])] + config.eps2);
  return lambda;
}

WaterFill waterfill(std::span<const double> lambdas, double budget) {
  if (lambdas.empty()) throw UsageError("waterfill: empty set");
  if (!(budget > 0.0)) throw DomainError("waterfill: budget must be positive");
  for (double l : lambdas)
    if (!(l > 0.0)) throw DomainError("waterfill: equivalent gains must be positive");

  const std::size_t n = lambdas.size();
  std::vector<double> floor(n);
  for (std::size_t i = 0; i < n; ++i) floor[i] = 1.0 / lambdas[i];
  std::vector<double> sorted = floor;
  std::sort(sorted.begin(), sorted.end());

  // With the a lowest floors active, mu = (budget + sum of those floors) / a.
  // The first a for which mu does not exceed the next floor is the solution.
  double level = 0.0;
  double acc = 0.0;
  for (std::size_t a = 1; a <= n; ++a) {
    acc += sorted[a - 1];
    level = (budget + acc) / static_cast<double>(a);
    if (a == n || level <= sorted[a]) break;
  }

  WaterFill out;
  out.level = level;
  out.powers.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.powers[i] = std::max(level - floor[i], 0.0);
  return out;
}

double estimated_rate(double power, double gain, double sigma_w2, double rev_int, double eps2) {
  return std::log2(1.0 + power * gain / (sigma_w2 + rev_int + eps2));
}

double sum_rate(std::span<const double> powers, std::span<const double> lambdas) {
  double r = 0.0;
  for (std::size_t i = 0; i < powers.size(); ++i) r += std::log2(1.0 + powers[i] * lambdas[i]);
  return r;
}

}  // namespace qosmimo
