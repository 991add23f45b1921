#include "qosmimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "qosmimo/channel.hpp"
#include "qosmimo/config_io.hpp"
#include "qosmimo/errors.hpp"

namespace qosmimo {

namespace {

constexpr std::uint64_t kGeometryStream = 0;
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kTargetStream = 2;

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Run body(i) for i in [0, n) on `jobs` threads. The exception from the lowest
// failing index is rethrown after every worker has stopped.
template <typename Body>
void parallel_for(long n, int jobs, Body body) {
  std::atomic<long> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  long failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  const int workers = static_cast<int>(std::clamp<long>(jobs, 1, std::max<long>(n, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<Algorithm> algorithms_for(const NetworkConfig& config, const TrialOptions& options) {
  std::vector<Algorithm> out;
  if (options.dmp) out.push_back(Algorithm::kDmp);
  if (options.dmp_noupdate) out.push_back(Algorithm::kDmpNoUpdate);
  if (options.mdml) out.push_back(Algorithm::kMdml);
  if (options.oracles) {
    if (config.K <= kExhaustiveMaxK) out.push_back(Algorithm::kOptimal);
    if (config.K <= kP2OracleMaxK) out.push_back(Algorithm::kP2Oracle);
  }
  return out;
}

}  // namespace

double AlgorithmResult::max_interference() const {
  return pr_interference.empty() ? 0.0 : *std::max_element(pr_interference.begin(), pr_interference.end());
}

double AlgorithmResult::mean_interference() const {
  return pr_interference.empty() ? 0.0 : pairwise_sum(pr_interference) / static_cast<double>(pr_interference.size());
}

const AlgorithmResult* TrialRecord::find(Algorithm a) const {
  for (const auto& r : results)
    if (r.algorithm == a) return &r;
  return nullptr;
}

TrialError::TrialError(int location, int channel, std::exception_ptr cause, const std::string& what)
    : std::runtime_error("trial (location " + std::to_string(location) + ", channel " + std::to_string(channel) +
                         "): " + what),
      location_(location),
      channel_(channel),
      cause_(std::move(cause)) {}

LocationDraw draw_location(const NetworkConfig& config, int location) {
  const Rng root(config.seed);
  LocationDraw d{config, {}};
  Rng geo = root.substream({kGeometryStream, static_cast<std::uint64_t>(location)});
  d.geometry = sample_geometry(config, geo);
  if (config.r0_mode == RateTargetMode::kUniform) {
    Rng targets = root.substream({kTargetStream, static_cast<std::uint64_t>(location)});
    d.config.R0.resize(static_cast<std::size_t>(config.K));
    // (0, r0_max]: 1 - U with U on [0, 1).
    for (auto& r : d.config.R0) r = config.r0_max * (1.0 - targets.uniform());
  }
  return d;
}

Rng channel_stream(const NetworkConfig& config, int location, int channel) {
  return Rng(config.seed).substream(
      {kChannelStream, static_cast<std::uint64_t>(location), static_cast<std::uint64_t>(channel)});
}

TrialRecord run_trial(const NetworkConfig& config, const Geometry& geometry, Rng& rng, const TrialOptions& options) {
  const ChannelRealization channels = sample_channels(geometry, config.M, rng);
  const CsiView csi = corrupt_csi(channels, config, rng);
  const Eigen::VectorXd rev = reverse_interference(channels, config.Pp);
  const std::span<const double> rev_span(rev.data(), static_cast<std::size_t>(rev.size()));

  TrialRecord rec;
  for (Algorithm a : algorithms_for(config, options)) {
    SelectionOutcome out;
    switch (a) {
      case Algorithm::kDmp: out = dmp(csi, config, true); break;
      case Algorithm::kDmpNoUpdate: out = dmp(csi, config, false); break;
      case Algorithm::kMdml: out = mdml(csi, config); break;
      case Algorithm::kOptimal: out = exhaustive_optimal(csi, config); break;
      case Algorithm::kP2Oracle: out = oracle_p2(csi, config); break;
    }
    const PerformanceReport rep = evaluate(channels, out, rev_span, config);
    AlgorithmResult r;
    r.algorithm = a;
    r.cardinality = static_cast<int>(out.set.size());
    r.satisfied = rep.satisfied;
    r.sum_power = rep.sum_power;
    r.pr_interference = rep.pr_interference;
    r.iterations = out.iterations;
    rec.results.push_back(std::move(r));
  }
  return rec;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MeanStderr mean_stderr(std::span<const double> v) {
  MeanStderr out;
  out.n = static_cast<long>(v.size());
  if (v.empty()) return out;
  out.mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() > 1) {
    std::vector<double> sq(v.size());
    std::transform(v.begin(), v.end(), sq.begin(), [&](double x) { return (x - out.mean) * (x - out.mean); });
    const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(v.size()));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::vector<SummaryRow> rows;
  if (records.empty()) return rows;
  std::vector<Algorithm> algos;
  for (const auto& r : records.front().results) algos.push_back(r.algorithm);

  for (Algorithm a : algos) {
    std::vector<const AlgorithmResult*> rs;
    for (const auto& rec : records) {
      const AlgorithmResult* r = rec.find(a);
      if (!r) throw UsageError("summarize: records run different algorithm sets");
      rs.push_back(r);
    }
    auto add = [&](const std::string& metric, auto get) {
      std::vector<double> v;
      v.reserve(rs.size());
      for (const auto* r : rs) v.push_back(get(*r));
      const auto ms = mean_stderr(v);
      rows.push_back({std::string(algorithm_tag(a)), metric, ms.mean, ms.stderr_, ms.n, "simulation"});
    };
    add("cardinality", [](const AlgorithmResult& r) { return double(r.cardinality); });
    add("k_star_star", [](const AlgorithmResult& r) { return double(r.satisfied); });
    add("sum_power_w", [](const AlgorithmResult& r) { return r.sum_power; });
    add("max_il_w", [](const AlgorithmResult& r) { return r.max_interference(); });
    add("mean_il_w", [](const AlgorithmResult& r) { return r.mean_interference(); });
    add("iterations", [](const AlgorithmResult& r) { return double(r.iterations); });
    const std::size_t L = rs.front()->pr_interference.size();
    for (std::size_t l = 0; l < L; ++l)
      add("il_" + std::to_string(l), [l](const AlgorithmResult& r) { return r.pr_interference.at(l); });
  }
  return rows;
}

const SummaryRow* CampaignSummary::find(std::string_view algo, std::string_view metric) const {
  for (const auto& r : rows)
    if (r.algo == algo && r.metric == metric) return &r;
  return nullptr;
}

const SummaryRow& CampaignSummary::at(std::string_view algo, std::string_view metric) const {
  const SummaryRow* r = find(algo, metric);
  if (!r) throw UsageError("summary has no row " + std::string(algo) + "/" + std::string(metric));
  return *r;
}

Campaign run_campaign(const NetworkConfig& config, int n_locations, int n_channels, int jobs,
                      const TrialOptions& options) {
  if (n_locations < 1 || n_channels < 1) throw UsageError("run_campaign: counts must be at least 1");
  require_valid(config);

  std::vector<LocationDraw> locations(static_cast<std::size_t>(n_locations));
  parallel_for(n_locations, jobs, [&](long i) { locations[std::size_t(i)] = draw_location(config, int(i)); });

  const long total = long(n_locations) * n_channels;
  Campaign c;
  c.records.resize(static_cast<std::size_t>(total));
  parallel_for(total, jobs, [&](long t) {
    const int loc = int(t / n_channels);
    const int ch = int(t % n_channels);
    try {
      const LocationDraw& d = locations[std::size_t(loc)];
      Rng rng = channel_stream(config, loc, ch);
      TrialRecord rec = run_trial(d.config, d.geometry, rng, options);
      rec.location_index = loc;
      rec.channel_index = ch;
      c.records[std::size_t(t)] = std::move(rec);
    } catch (const std::exception& e) {
      throw TrialError(loc, ch, std::current_exception(), e.what());
    }
  });

  c.summary.config = config;
  c.summary.config_hash = config_hash(config);
  c.summary.n_locations = n_locations;
  c.summary.n_channels = n_channels;
  c.summary.trials = total;
  c.summary.rows = summarize(c.records);
  return c;
}

CampaignSummary run_analysis(const NetworkConfig& config, int n_locations, int jobs) {
  if (n_locations < 1) throw UsageError("run_analysis: n_locations must be at least 1");
  require_valid(config);
  if (config.K > kAnalysisMaxK) {
    throw UsageError("analysis: K=" + std::to_string(config.K) + " exceeds the exact-recursion guard of " +
                     std::to_string(kAnalysisMaxK) + "; use simulate for larger K");
  }
  const std::size_t L = static_cast<std::size_t>(config.L);
  struct PerLocation {
    double selected[2], satisfied[2], il[2];
  };
  std::vector<PerLocation> per(static_cast<std::size_t>(n_locations));
  parallel_for(n_locations, jobs, [&](long i) {
    const LocationDraw d = draw_location(config, int(i));
    for (int m = 0; m < 2; ++m) {
      const DmpAnalysis a(d.config, d.geometry, m == 0 ? UpdateMode::kWithUpdate : UpdateMode::kWithoutUpdate);
      auto& p = per[std::size_t(i)];
      p.selected[m] = a.expected_selected();
      p.satisfied[m] = a.expected_satisfied();
      p.il[m] = L > 0 ? a.expected_interference(0) : 0.0;  // identical for every PR
    }
  });

  CampaignSummary s;
  s.config = config;
  s.config_hash = config_hash(config);
  s.n_locations = n_locations;
  for (int m = 0; m < 2; ++m) {
    const std::string algo(algorithm_tag(m == 0 ? Algorithm::kDmp : Algorithm::kDmpNoUpdate));
    auto add = [&](const std::string& metric, auto get) {
      std::vector<double> v;
      for (const auto& p : per) v.push_back(get(p));
      const auto ms = mean_stderr(v);
      s.rows.push_back({algo, metric, ms.mean, ms.stderr_, ms.n, "analysis"});
    };
    add("cardinality", [m](const PerLocation& p) { return p.selected[m]; });
    add("k_star_star", [m](const PerLocation& p) { return p.satisfied[m]; });
    add("mean_il_w", [m](const PerLocation& p) { return p.il[m]; });
    for (std::size_t l = 0; l < L; ++l) add("il_" + std::to_string(l), [m](const PerLocation& p) { return p.il[m]; });
  }
  return s;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "M") return SweepAxis::kM;
  if (name == "I0") return SweepAxis::kI0;
  if (name == "R0-scale") return SweepAxis::kR0Scale;
  if (name == "L") return SweepAxis::kL;
  if (name == "K") return SweepAxis::kK;
  if (name == "eps1-scale") return SweepAxis::kEps1Scale;
  if (name == "eps2-scale") return SweepAxis::kEps2Scale;
  throw UsageError("unknown sweep axis '" + std::string(name) +
                   "' (expected M, I0, R0-scale, L, K, eps1-scale or eps2-scale)");
}

std::string_view sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kM: return "M";
    case SweepAxis::kI0: return "I0";
    case SweepAxis::kR0Scale: return "R0-scale";
    case SweepAxis::kL: return "L";
    case SweepAxis::kK: return "K";
    case SweepAxis::kEps1Scale: return "eps1-scale";
    case SweepAxis::kEps2Scale: return "eps2-scale";
  }
  return "?";
}

NetworkConfig apply_axis(const NetworkConfig& base, SweepAxis axis, double value) {
  NetworkConfig c = base;
  auto as_int = [&] {
    if (value != std::floor(value)) throw ConfigError(std::string(sweep_axis_name(axis)) + " must be an integer");
    return static_cast<int>(value);
  };
  switch (axis) {
    case SweepAxis::kM: c.M = as_int(); break;
    case SweepAxis::kI0: c.I0 = dbm_to_watts(value); break;
    case SweepAxis::kR0Scale:
      for (auto& r : c.R0) r *= value;
      c.r0_max *= value;
      break;
    case SweepAxis::kL: c.L = as_int(); break;
    case SweepAxis::kK: {
      c.K = as_int();
      const double fill = base.R0.empty() ? 1.0 : base.R0.back();
      c.R0.resize(static_cast<std::size_t>(std::max(c.K, 0)), fill);
      break;
    }
    case SweepAxis::kEps1Scale: c.eps1 = value * c.csi_error_pr(); break;
    case SweepAxis::kEps2Scale: c.eps2 = value * c.P0 * c.csi_error_su(); break;
  }
  return c;
}

std::vector<SweepPoint> sweep(const NetworkConfig& base, SweepAxis axis, const std::vector<double>& values,
                              int n_locations, int n_channels, int jobs, const TrialOptions& options) {
  if (values.empty()) throw UsageError("sweep: no values given");
  std::vector<SweepPoint> out;
  for (double v : values) {
    SweepPoint p;
    p.value = v;
    try {
      const NetworkConfig c = apply_axis(base, axis, v);
      const auto errors = validate(c);
      if (!errors.empty()) {
        p.warning = "skipped " + std::string(sweep_axis_name(axis)) + "=" + fmt(v) + ":";
        for (const auto& e : errors) p.warning += " " + e + ";";
      } else {
        p.campaign = run_campaign(c, n_locations, n_channels, jobs, options);
        p.campaign->summary.axis_value = fmt(v);
      }
    } catch (const ConfigError& e) {
      p.warning = "skipped " + std::string(sweep_axis_name(axis)) + "=" + fmt(v) + ": " + e.what();
    } catch (const DomainError& e) {
      p.warning = "skipped " + std::string(sweep_axis_name(axis)) + "=" + fmt(v) + ": " + e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

// RFC 4180: quote fields holding separators, quotes or line breaks.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << "location_idx,channel_idx,algo,cardinality,k_star_star,sum_power_w,max_il_w,mean_il_w,iterations\r\n";
  for (const auto& rec : records)
    for (const auto& r : rec.results)
      os << rec.location_index << ',' << rec.channel_index << ',' << algorithm_tag(r.algorithm) << ','
         << r.cardinality << ',' << r.satisfied << ',' << fmt(r.sum_power) << ',' << fmt(r.max_interference()) << ','
         << fmt(r.mean_interference()) << ',' << r.iterations << "\r\n";
}

void write_summary_header(std::ostream& os) { os << "config_hash,axis_value,algo,metric,mean,stderr,n,source\r\n"; }

void write_summary_rows(std::ostream& os, const CampaignSummary& s) {
  for (const auto& r : s.rows)
    os << s.config_hash << ',' << csv_field(s.axis_value) << ',' << r.algo << ',' << r.metric << ',' << fmt(r.mean)
       << ',' << fmt(r.stderr_) << ',' << r.n << ',' << r.source << "\r\n";
}

void write_warning_row(std::ostream& os, const std::string& config_hash, const std::string& axis_value,
                       const std::string& message) {
  os << config_hash << ',' << csv_field(axis_value) << ",none," << csv_field(message) << ",,,0,warning\r\n";
}

}  // namespace qosmimo
