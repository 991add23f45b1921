#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "qosmimo/beamform.hpp"
#include "qosmimo/channel.hpp"
#include "qosmimo/model.hpp"

namespace qosmimo {

enum class Algorithm {
  kDmp,          // delete max power, beams and powers recomputed after each drop
  kDmpNoUpdate,  // delete max power, powers frozen at their full-set values
  kMdml,         // delete min equivalent gain while the water-filled sum rate grows
  kOptimal,      // exhaustive search over subsets
  kP2Oracle,     // max-cardinality subset under the frozen full-set powers
};

std::string_view algorithm_tag(Algorithm a);

/// Largest K accepted by exhaustive_optimal.
inline constexpr int kExhaustiveMaxK = 14;
/// Largest K accepted by oracle_p2.
inline constexpr int kP2OracleMaxK = 20;
/// Achieved rates within this many bits/s/Hz below target still count as meeting it.
inline constexpr double kRateTolerance = 1e-9;

struct SelectionOutcome {
  Algorithm algorithm = Algorithm::kDmp;
  std::vector<int> set;        // selected SUs in ascending order
  std::vector<double> powers;  // watts, aligned with `set`
  BeamSet beams;
  int iterations = 0;
  std::vector<int> dropped;  // in removal order
  bool feasible = false;
  double budget = 0.0;

  double total_power() const;
};

struct PerformanceReport {
  std::vector<double> achieved_rates;  // aligned with the outcome's set
  int satisfied = 0;                   // K**
  std::vector<double> pr_interference; // I_l, length L
  double sum_power = 0.0;

  double max_interference() const;
  double mean_interference() const;
};

// Algorithm cores over abstract per-set quantities. They let the iteration
// logic be exercised on hand-built tables.

/// Powers required by each member of a candidate set, aligned with it.
using PowerOracle = std::function<std::vector<double>(std::span<const int>)>;
/// Equivalent gains of each member of a candidate set, aligned with it.
using LambdaOracle = std::function<std::vector<double>(std::span<const int>)>;

struct DropTrace {
  std::vector<int> set;
  std::vector<double> powers;
  std::vector<int> dropped;
};

/// Drop the max-power member until the total fits `budget`. Ties drop the
/// highest SU index. With `update` false the powers of the initial set are
/// frozen and the oracle is called once.
DropTrace dmp_core(std::vector<int> initial, double budget, const PowerOracle& powers, bool update);

/// Drop the min-lambda member (ties: highest index) while the water-filled sum
/// rate strictly increases.
DropTrace mdml_core(std::vector<int> initial, double budget, const LambdaOracle& lambdas);

/// Longest ascending-power prefix (ties by index) whose sum fits `budget`.
std::vector<int> p2_core(std::span<const double> powers, double budget);

SelectionOutcome dmp(const CsiView& csi, const NetworkConfig& config, bool update_vectors);
SelectionOutcome mdml(const CsiView& csi, const NetworkConfig& config);
/// First feasible subset in decreasing cardinality, lexicographic within a
/// cardinality. Throws UsageError above kExhaustiveMaxK.
SelectionOutcome exhaustive_optimal(const CsiView& csi, const NetworkConfig& config);
/// Max-cardinality subset under the frozen full-set powers.
SelectionOutcome oracle_p2(const CsiView& csi, const NetworkConfig& config);

/// Rates, satisfied count and PR interference on the true channels.
PerformanceReport evaluate(const ChannelRealization& true_channels, const SelectionOutcome& outcome,
                           std::span<const double> rev_int, const NetworkConfig& config);

}  // namespace qosmimo
