// Command-line driver: simulate, analyze, compare, sweep, oracle, validate.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "qosmimo/config_io.hpp"
#include "qosmimo/errors.hpp"
#include "qosmimo/harness.hpp"

namespace fs = std::filesystem;
using namespace qosmimo;

namespace {

enum Exit { kOk = 0, kGateFailure = 1, kUsage = 2, kNumeric = 3 };

struct CommonArgs {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool force = false;
  std::string oracle;  // "", "on" or "off"
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_out) {
  cmd->add_option("--config", a.config, "JSON config file")->required();
  auto* out = cmd->add_option("--out", a.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--set", a.overrides, "override key=value (repeatable)");
  cmd->add_option("--seed", a.seed, "override the master seed");
  cmd->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", a.force, "overwrite existing output files");
  cmd->add_option("--oracle", a.oracle, "run the oracles (on|off)")->check(CLI::IsMember({"on", "off"}));
}

ConfigFile resolve(const CommonArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw ConfigError("cannot open config file " + a.config);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + a.config + ": " + e.what());
  }
  apply_overrides(j, a.overrides);
  if (a.seed) j["seed"] = *a.seed;
  if (a.jobs) j["jobs"] = *a.jobs;
  if (!a.oracle.empty()) j["oracles"] = a.oracle == "on";
  ConfigFile c = config_from_json(j);
  require_valid(c.network);
  return c;
}

// Opens every output up front so a run never starts only to fail at the end.
class Outputs {
 public:
  Outputs(const std::string& dir, bool force) : dir_(dir), force_(force) {}

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / name;
    if (fs::exists(p) && !force_) throw UsageError(p.string() + " exists; pass --force to overwrite");
    std::ofstream os(p, std::ios::binary);
    if (!os) throw UsageError("cannot write " + p.string());
    return os;
  }

  void check(std::initializer_list<const char*> names) const {
    for (const char* n : names)
      if (fs::exists(dir_ / n) && !force_) throw UsageError((dir_ / n).string() + " exists; pass --force to overwrite");
  }

 private:
  fs::path dir_;
  bool force_;
};

void write_echo(Outputs& out, const ConfigFile& c) { out.open("config-echo.json") << config_to_json(c).dump(2) << "\n"; }

void print_rows(const std::vector<SummaryRow>& rows) {
  std::printf("%-12s %-12s %-10s %14s %12s %8s\n", "algo", "metric", "source", "mean", "stderr", "n");
  for (const auto& r : rows)
    std::printf("%-12s %-12s %-10s %14.6g %12.4g %8ld\n", r.algo.c_str(), r.metric.c_str(), r.source.c_str(), r.mean,
                r.stderr_, r.n);
}

TrialOptions options_for(const ConfigFile& c) {
  TrialOptions o;
  o.oracles = c.run.oracles;
  return o;
}

int cmd_validate(const CommonArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw ConfigError("cannot open config file " + a.config);
  nlohmann::json j;
  in >> j;
  apply_overrides(j, a.overrides);
  const ConfigFile c = config_from_json(j);
  const auto errors = validate(c.network);
  for (const auto& e : errors) std::cout << "invalid: " << e << "\n";
  if (!errors.empty()) return kUsage;
  std::cout << "valid (config hash " << config_hash(c.network) << ", budget " << c.network.budget() << " W)\n";
  return kOk;
}

int cmd_simulate(const CommonArgs& a) {
  const ConfigFile c = resolve(a);
  Outputs out(a.out, a.force);
  out.check({"trials.csv", "summary.csv", "config-echo.json"});
  const Campaign camp = run_campaign(c.network, c.run.n_locations, c.run.n_channels, c.run.jobs, options_for(c));
  auto trials = out.open("trials.csv");
  write_trials_csv(trials, camp.records);
  auto summary = out.open("summary.csv");
  write_summary_header(summary);
  write_summary_rows(summary, camp.summary);
  write_echo(out, c);
  std::printf("config %s: %ld trials (%d locations x %d channels)\n", camp.summary.config_hash.c_str(),
              camp.summary.trials, camp.summary.n_locations, camp.summary.n_channels);
  print_rows(camp.summary.rows);
  return kOk;
}

int cmd_analyze(const CommonArgs& a) {
  const ConfigFile c = resolve(a);
  Outputs out(a.out, a.force);
  out.check({"analysis.csv", "config-echo.json"});
  const CampaignSummary s = run_analysis(c.network, c.run.n_locations, c.run.jobs);
  auto os = out.open("analysis.csv");
  write_summary_header(os);
  write_summary_rows(os, s);
  write_echo(out, c);
  print_rows(s.rows);
  return kOk;
}

// Minimal RFC 4180 reader for summary files.
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  char ch;
  auto end_row = [&] {
    row.push_back(field);
    field.clear();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(row);
    row.clear();
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') field += static_cast<char>(in.get());
        else quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(field);
      field.clear();
    } else if (ch == '\n') {
      end_row();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

CampaignSummary read_summary(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty() || rows[0].size() < 8 || rows[0][0] != "config_hash") throw UsageError(path + ": not a summary CSV");
  CampaignSummary s;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 8) throw UsageError(path + ": short row " + std::to_string(i + 1));
    if (r[7] == "warning") continue;
    if (s.config_hash.empty()) s.config_hash = r[0];
    if (r[0] != s.config_hash) throw UsageError(path + ": rows from several configs");
    s.rows.push_back({r[2], r[3], std::stod(r[4]), std::stod(r[5]), std::stol(r[6]), r[7]});
  }
  return s;
}

struct Band {
  bool relative;
  double width;
};

Band band_for(const std::string& metric) {
  if (metric == "cardinality" || metric == "k_star_star") return {false, 0.3};
  return {true, 0.10};
}

int cmd_compare(const CommonArgs& a, const std::string& sim_path, const std::string& analysis_path) {
  const ConfigFile c = resolve(a);
  Outputs out(a.out, a.force);
  out.check({"compare.csv", "config-echo.json"});
  const std::string hash = config_hash(c.network);

  CampaignSummary sim, ana;
  if (!sim_path.empty()) {
    sim = read_summary(sim_path);
  } else {
    TrialOptions o;
    o.mdml = false;
    sim = run_campaign(c.network, c.run.n_locations, c.run.n_channels, c.run.jobs, o).summary;
  }
  ana = analysis_path.empty() ? run_analysis(c.network, c.run.n_locations, c.run.jobs) : read_summary(analysis_path);
  if (sim.config_hash != hash || ana.config_hash != hash) {
    throw ConfigError("config mismatch: simulation " + sim.config_hash + ", analysis " + ana.config_hash +
                      ", requested " + hash);
  }

  auto os = out.open("compare.csv");
  os << "algo,metric,analysis,simulation,simulation_stderr,abs_deviation,band,within_band\r\n";
  bool all_ok = true;
  std::map<std::string, double> worst;
  std::printf("%-12s %-12s %14s %14s %12s %8s\n", "algo", "metric", "analysis", "simulation", "|deviation|", "ok");
  for (const auto& ar : ana.rows) {
    const SummaryRow* sr = sim.find(ar.algo, ar.metric);
    if (!sr) continue;
    const double dev = std::abs(ar.mean - sr->mean);
    const Band b = band_for(ar.metric);
    const double allowed = b.relative ? b.width * std::abs(sr->mean) : b.width;
    const bool ok = dev <= allowed;
    all_ok = all_ok && ok;
    worst[ar.metric] = std::max(worst[ar.metric], dev);
    os << ar.algo << ',' << ar.metric << ',' << ar.mean << ',' << sr->mean << ',' << sr->stderr_ << ',' << dev << ','
       << allowed << ',' << (ok ? 1 : 0) << "\r\n";
    std::printf("%-12s %-12s %14.6g %14.6g %12.4g %8s\n", ar.algo.c_str(), ar.metric.c_str(), ar.mean, sr->mean, dev,
                ok ? "yes" : "NO");
  }
  write_echo(out, c);
  std::printf("max |analysis - simulation| per metric:\n");
  for (const auto& [m, d] : worst) std::printf("  %-12s %.6g\n", m.c_str(), d);
  std::printf("%s\n", all_ok ? "all deviations within bands" : "deviation outside band");
  return all_ok ? kOk : kGateFailure;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--values: cannot parse '" + item + "'");
    }
  }
  if (v.empty()) throw UsageError("--values: empty list");
  return v;
}

int cmd_sweep(const CommonArgs& a, const std::string& axis_name, const std::string& values_text) {
  const ConfigFile c = resolve(a);
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const auto values = parse_values(values_text);
  Outputs out(a.out, a.force);
  out.check({"summary.csv", "config-echo.json"});
  const auto points = sweep(c.network, axis, values, c.run.n_locations, c.run.n_channels, c.run.jobs, options_for(c));
  auto os = out.open("summary.csv");
  write_summary_header(os);
  for (const auto& p : points) {
    if (p.campaign) {
      write_summary_rows(os, p.campaign->summary);
      std::printf("%s = %s\n", axis_name.c_str(), p.campaign->summary.axis_value.c_str());
      print_rows(p.campaign->summary.rows);
    } else {
      std::ostringstream v;
      v << p.value;
      write_warning_row(os, config_hash(c.network), v.str(), p.warning);
      std::fprintf(stderr, "warning: %s\n", p.warning.c_str());
    }
  }
  write_echo(out, c);
  return kOk;
}

int cmd_oracle(const CommonArgs& a) {
  ConfigFile c = resolve(a);
  c.run.oracles = true;
  if (c.network.K > kExhaustiveMaxK) {
    std::fprintf(stderr, "note: K=%d exceeds the exhaustive guard of %d; only the P2 oracle runs\n", c.network.K,
                 kExhaustiveMaxK);
  }
  Outputs out(a.out, a.force);
  out.check({"trials.csv", "summary.csv", "config-echo.json"});
  const Campaign camp = run_campaign(c.network, c.run.n_locations, c.run.n_channels, c.run.jobs, options_for(c));
  long ordering = 0, p2 = 0;
  for (const auto& rec : camp.records) {
    const auto* d1 = rec.find(Algorithm::kDmp);
    const auto* d2 = rec.find(Algorithm::kDmpNoUpdate);
    const auto* opt = rec.find(Algorithm::kOptimal);
    const auto* p = rec.find(Algorithm::kP2Oracle);
    if (opt && (d2->cardinality > d1->cardinality || d1->cardinality > opt->cardinality)) ++ordering;
    if (p && d2->cardinality != p->cardinality) ++p2;
  }
  auto trials = out.open("trials.csv");
  write_trials_csv(trials, camp.records);
  auto summary = out.open("summary.csv");
  write_summary_header(summary);
  write_summary_rows(summary, camp.summary);
  write_echo(out, c);
  print_rows(camp.summary.rows);
  std::printf("ordering violations (|S2*| <= |S1*| <= |S*|): %ld of %ld\n", ordering, camp.summary.trials);
  std::printf("P2 mismatches (dmp_noupdate vs p2_oracle): %ld of %ld\n", p2, camp.summary.trials);
  return ordering == 0 && p2 == 0 ? kOk : kGateFailure;
}

// Classify by the innermost cause so trial-wrapped failures keep their code.
int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const TrialError& t) {
    return exit_code_for(t.cause());
  } catch (const NumericError&) {
    return kNumeric;
  } catch (const SingularityError&) {
    return kNumeric;
  } catch (...) {
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoS-constrained user selection for underlay MIMO cognitive radio"};
  app.require_subcommand(1);

  CommonArgs common;
  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo campaign");
  add_common(simulate, common, true);
  auto* analyze = app.add_subcommand("analyze", "closed-form predictions (K <= 10)");
  add_common(analyze, common, true);
  auto* compare = app.add_subcommand("compare", "analysis against simulation");
  add_common(compare, common, true);
  std::string sim_path, analysis_path;
  compare->add_option("--sim", sim_path, "existing simulation summary.csv");
  compare->add_option("--analysis", analysis_path, "existing analysis.csv");
  auto* sweep_cmd = app.add_subcommand("sweep", "one campaign per axis value");
  add_common(sweep_cmd, common, true);
  std::string axis, values;
  sweep_cmd->add_option("--axis", axis, "M, I0, R0-scale, L, K, eps1-scale or eps2-scale")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values (I0 in dBm)")->required();
  auto* oracle = app.add_subcommand("oracle", "check heuristics against the oracles");
  add_common(oracle, common, true);
  auto* validate_cmd = app.add_subcommand("validate", "check a config and list violations");
  add_common(validate_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(common);
    if (*analyze) return cmd_analyze(common);
    if (*compare) return cmd_compare(common, sim_path, analysis_path);
    if (*sweep_cmd) return cmd_sweep(common, axis, values);
    if (*oracle) return cmd_oracle(common);
    if (*validate_cmd) return cmd_validate(common);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(std::current_exception());
  }
  return kUsage;
}
