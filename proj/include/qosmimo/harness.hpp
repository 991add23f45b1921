#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qosmimo/analysis.hpp"
#include "qosmimo/model.hpp"
#include "qosmimo/rng.hpp"
#include "qosmimo/select.hpp"

namespace qosmimo {

/// Which algorithms a trial runs. Oracles are opt-in and skipped above their K guards.
struct TrialOptions {
  bool dmp = true;
  bool dmp_noupdate = true;
  bool mdml = true;
  bool oracles = false;
};

struct AlgorithmResult {
  Algorithm algorithm = Algorithm::kDmp;
  int cardinality = 0;  // |S*|
  int satisfied = 0;    // K**
  double sum_power = 0.0;
  std::vector<double> pr_interference;  // I_l per PR
  int iterations = 0;

  double max_interference() const;
  double mean_interference() const;
};

struct TrialRecord {
  int location_index = 0;
  int channel_index = 0;
  std::vector<AlgorithmResult> results;

  /// nullptr when the algorithm did not run.
  const AlgorithmResult* find(Algorithm a) const;
};

/// A failure inside one trial, tagged with its coordinates. `cause` holds the original exception.
class TrialError : public std::runtime_error {
 public:
  TrialError(int location, int channel, std::exception_ptr cause, const std::string& what);
  int location() const { return location_; }
  int channel() const { return channel_; }
  const std::exception_ptr& cause() const { return cause_; }

 private:
  int location_;
  int channel_;
  std::exception_ptr cause_;
};

/// Per-location inputs: the drop and the config with any per-location rate targets.
struct LocationDraw {
  NetworkConfig config;
  Geometry geometry;
};

/// Streams: geometry from (seed, 0, loc), rate targets from (seed, 2, loc),
/// channels and CSI errors from (seed, 1, loc, ch).
LocationDraw draw_location(const NetworkConfig& config, int location);
Rng channel_stream(const NetworkConfig& config, int location, int channel);

TrialRecord run_trial(const NetworkConfig& config, const Geometry& geometry, Rng& rng,
                      const TrialOptions& options = {});

/// Mean, standard error and count of one (source, algorithm, metric) series.
struct SummaryRow {
  std::string algo;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
  std::string source = "simulation";
};

struct CampaignSummary {
  NetworkConfig config;
  std::string config_hash;
  std::string axis_value;  // empty outside sweeps
  int n_locations = 0;
  int n_channels = 0;
  long trials = 0;
  std::vector<SummaryRow> rows;

  /// nullptr when absent.
  const SummaryRow* find(std::string_view algo, std::string_view metric) const;
  /// Throws UsageError when absent.
  const SummaryRow& at(std::string_view algo, std::string_view metric) const;
};

struct Campaign {
  CampaignSummary summary;
  std::vector<TrialRecord> records;  // location-major order
};

/// Sum by recursive halving; result does not depend on thread scheduling.
double pairwise_sum(std::span<const double> values);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
};
MeanStderr mean_stderr(std::span<const double> values);

/// Aggregate records into summary rows. Metrics per algorithm: cardinality,
/// k_star_star, sum_power_w, max_il_w, mean_il_w, iterations and il_<l> per PR.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

Campaign run_campaign(const NetworkConfig& config, int n_locations, int n_channels, int jobs,
                      const TrialOptions& options = {});

/// Closed-form predictions averaged over the same location draws a campaign
/// would use. Rows use algo "dmp" (with update) and "dmp_noupdate", source "analysis".
CampaignSummary run_analysis(const NetworkConfig& config, int n_locations, int jobs);

enum class SweepAxis { kM, kI0, kR0Scale, kL, kK, kEps1Scale, kEps2Scale };

/// Names accepted on the command line: M, I0, R0-scale, L, K, eps1-scale, eps2-scale.
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view sweep_axis_name(SweepAxis axis);

/// Config for one sweep point. I0 values are in dBm; R0-scale multiplies the
/// targets (and r0_max); eps scales are relative to the default margins.
NetworkConfig apply_axis(const NetworkConfig& base, SweepAxis axis, double value);

struct SweepPoint {
  double value = 0.0;
  std::optional<Campaign> campaign;  // empty when the derived config was invalid
  std::string warning;
};

/// One campaign per value. Axes that leave K, L and geometry parameters alone
/// reuse the same location draws, since the streams depend only on the seed.
std::vector<SweepPoint> sweep(const NetworkConfig& base, SweepAxis axis, const std::vector<double>& values,
                              int n_locations, int n_channels, int jobs, const TrialOptions& options = {});

// CSV persistence.
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
void write_summary_header(std::ostream& os);
void write_summary_rows(std::ostream& os, const CampaignSummary& summary);
/// Placeholder row for a skipped sweep point.
void write_warning_row(std::ostream& os, const std::string& config_hash, const std::string& axis_value,
                       const std::string& message);

}  // namespace qosmimo
