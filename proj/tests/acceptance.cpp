// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "qosmimo/alloc.hpp"
#include "qosmimo/analysis.hpp"
#include "qosmimo/beamform.hpp"
#include "qosmimo/channel.hpp"
#include "qosmimo/config_io.hpp"
#include "qosmimo/harness.hpp"
#include "qosmimo/select.hpp"

using namespace qosmimo;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NetworkConfig base(int K, int M, int L, double i0_dbm = -106.0) {
  NetworkConfig c;
  c.K = K;
  c.M = M;
  c.L = L;
  c.R0.assign(static_cast<std::size_t>(K), 1.0);
  c.I0 = dbm_to_watts(i0_dbm);
  return c;
}

NetworkConfig desk() { return load_config(QOSMIMO_DESK_CONFIG).network; }

// Random geometry and channels for one instance.
struct Instance {
  ChannelRealization channels;
  CsiView csi;
};

Instance instance(const NetworkConfig& c, std::uint64_t tag, std::uint64_t i) {
  Rng root = Rng(c.seed).substream({tag, i});
  Rng geo = root.substream(0);
  const Geometry g = sample_geometry(c, geo);
  Rng ch = root.substream(1);
  Instance in;
  in.channels = sample_channels(g, c.M, ch);
  in.csi = corrupt_csi(in.channels, c, ch);
  return in;
}

MeanStderr paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return mean_stderr(d);
}

std::vector<double> per_trial(const std::vector<TrialRecord>& recs, Algorithm a, bool satisfied) {
  std::vector<double> v;
  v.reserve(recs.size());
  for (const auto& r : recs) {
    const auto* x = r.find(a);
    v.push_back(satisfied ? x->satisfied : x->cardinality);
  }
  return v;
}

Verdict zf_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double leak = 0.0, norm_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int M = i % 2 ? 128 : 32;
    const int L = i % 5;
    NetworkConfig c = base(20, M, L);
    const Instance in = instance(c, 1, static_cast<std::uint64_t>(i));
    Rng pick = Rng(c.seed).substream({2, static_cast<std::uint64_t>(i)});
    const int size = 1 + static_cast<int>(pick.uniform() * 20.0) % 20;
    std::vector<int> all(20);
    std::iota(all.begin(), all.end(), 0);
    for (int j = 0; j < size; ++j) std::swap(all[j], all[j + static_cast<int>(pick.uniform() * (20 - j)) % (20 - j)]);
    std::vector<int> s(all.begin(), all.begin() + size);
    const BeamSet b = zf_vectors(in.csi, s);
    for (int a = 0; a < size; ++a) {
      const auto v = b.vectors.col(a);
      norm_err = std::max(norm_err, std::abs(v.norm() - 1.0));
      for (int o : s)
        if (o != s[a]) leak = std::max(leak, std::abs(in.csi.hhat_su.col(o).dot(v)) / in.csi.hhat_su.col(o).norm());
      for (int l = 0; l < L; ++l)
        leak = std::max(leak, std::abs(in.csi.hhat_pr.col(l).dot(v)) / in.csi.hhat_pr.col(l).norm());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {leak <= 1e-9 && norm_err <= 1e-10 && secs < 60.0,
          fmt("max leakage %.2e, max |norm-1| %.2e, %.1f s", leak, norm_err, secs)};
}

Verdict perfect_csi() {
  NetworkConfig c = base(20, 128, 4);
  c.sigma_delta2 = 0.0;
  c.sigma_Delta2 = 0.0;
  TrialOptions o;
  o.mdml = false;
  const Campaign camp = run_campaign(c, 5, 200, 1, o);
  int violations = 0;
  double worst = 0.0;
  for (const auto& r : camp.records) {
    for (Algorithm a : {Algorithm::kDmp, Algorithm::kDmpNoUpdate}) {
      const auto* x = r.find(a);
      if (x->satisfied != x->cardinality) ++violations;
      for (double il : x->pr_interference) {
        worst = std::max(worst, il);
        if (il > 1e-18) ++violations;
      }
    }
  }
  return {violations == 0, fmt("%zu trials, %d violations, max I_l %.2e W", camp.records.size(), violations, worst)};
}

Verdict sinr_loss() {
  const double want[] = {3.01, 0.97, 0.41};
  const double i0[] = {-100.0, -106.0, -110.0};
  const double sw2 = dbm_to_watts(-100.0);
  bool ok = true;
  std::string d;
  for (int i = 0; i < 3; ++i) {
    const double loss = 10.0 * std::log10(1.0 + dbm_to_watts(i0[i]) / sw2);
    ok = ok && std::abs(loss - want[i]) <= 0.01;
    d += fmt("%g dBm: %.4f dB  ", i0[i], loss);
  }
  return {ok, d};
}

Verdict p2_optimality() {
  int mismatches = 0, dropped = 0;
  for (int i = 0; i < 500; ++i) {
    const int K = 4 + i % 9;
    NetworkConfig c = base(K, 64, 2, -110.0 + (i % 7) * 2.0);
    const Instance in = instance(c, 3, static_cast<std::uint64_t>(i));
    const auto s2 = dmp(in.csi, c, false);
    const auto p2 = oracle_p2(in.csi, c);
    if (s2.set.size() != p2.set.size()) ++mismatches;
    if (static_cast<int>(s2.set.size()) < K) ++dropped;
  }
  return {mismatches == 0, fmt("500 instances, %d mismatches (%d with at least one drop)", mismatches, dropped)};
}

Verdict ordering() {
  int violations = 0, gaps = 0;
  for (int i = 0; i < 300; ++i) {
    NetworkConfig c = base(6, 32, 2, -106.0 + (i % 3) * 2.0);
    const Instance in = instance(c, 4, static_cast<std::uint64_t>(i));
    const auto s1 = dmp(in.csi, c, true).set.size();
    const auto s2 = dmp(in.csi, c, false).set.size();
    const auto opt = exhaustive_optimal(in.csi, c).set.size();
    if (!(s2 <= s1 && s1 <= opt)) ++violations;
    if (s2 < opt) ++gaps;
  }
  return {violations == 0, fmt("300 instances, %d violations, %d with |S2*| < |S*|", violations, gaps)};
}

Verdict near_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  NetworkConfig c = base(8, 128, 2);
  TrialOptions o;
  o.mdml = false;
  o.oracles = true;
  const Campaign camp = run_campaign(c, 20, 100, 1, o);
  const auto opt = per_trial(camp.records, Algorithm::kOptimal, false);
  const auto g1 = paired_difference(opt, per_trial(camp.records, Algorithm::kDmp, false));
  const auto g2 = paired_difference(opt, per_trial(camp.records, Algorithm::kDmpNoUpdate, false));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {g1.mean <= 0.1 && g2.mean <= 0.3 && secs < 600.0,
          fmt("mean |S*|-|S1*| = %.4f (se %.4f), mean |S*|-|S2*| = %.4f (se %.4f), mean |S*| = %.3f, %.1f s",
              g1.mean, g1.stderr_, g2.mean, g2.stderr_, mean_stderr(opt).mean, secs)};
}

// Full-set QoS powers and achieved rates for the desk instance.
struct FullSetDraws {
  std::vector<std::vector<double>> power;  // [k][draw]
  std::vector<std::vector<double>> rate;   // [k][draw]
};

FullSetDraws full_set_draws(const NetworkConfig& c, int n) {
  const LocationDraw d = draw_location(c, 0);
  FullSetDraws out;
  out.power.assign(static_cast<std::size_t>(c.K), std::vector<double>(static_cast<std::size_t>(n)));
  out.rate = out.power;
  std::vector<int> all(static_cast<std::size_t>(c.K));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < n; ++i) {
    Rng rng = channel_stream(c, 0, i);
    const auto ch = sample_channels(d.geometry, c.M, rng);
    const auto csi = corrupt_csi(ch, d.config, rng);
    SelectionOutcome sel;
    sel.set = all;
    sel.beams = zf_vectors(csi, all);
    const std::span<const double> rev(csi.rev_interference.data(), static_cast<std::size_t>(c.K));
    sel.powers = qos_power(all, std::span<const double>(sel.beams.gains.data(), all.size()), rev, d.config).powers;
    const auto rep = evaluate(ch, sel, rev, d.config);
    for (int k = 0; k < c.K; ++k) {
      out.power[std::size_t(k)][std::size_t(i)] = sel.powers[std::size_t(k)];
      out.rate[std::size_t(k)][std::size_t(i)] = rep.achieved_rates[std::size_t(k)];
    }
  }
  return out;
}

Verdict theorem1_fit() {
  const NetworkConfig c = desk();
  const LocationDraw d = draw_location(c, 0);
  const auto draws = full_set_draws(c, 10000);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int k = 0; k < c.K; ++k) {
    const auto fit = theorem1_params(k, UpdateMode::kWithoutUpdate, c.K, d.config, d.geometry).power();
    const auto& p = draws.power[std::size_t(k)];
    const double m = pairwise_sum(p) / double(p.size());
    std::vector<double> sq(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) sq[i] = (p[i] - m) * (p[i] - m);
    const double v = pairwise_sum(sq) / double(p.size() - 1);
    worst_mean = std::max(worst_mean, std::abs(m / fit.mean() - 1.0));
    worst_var = std::max(worst_var, std::abs(v / fit.variance() - 1.0));
  }
  return {worst_mean <= 0.05 && worst_var <= 0.15,
          fmt("worst relative error: mean %.2f%%, variance %.2f%% (10^4 draws)", 100 * worst_mean, 100 * worst_var)};
}

Verdict theorem2_fit() {
  const NetworkConfig c = desk();
  const LocationDraw d = draw_location(c, 0);
  const auto draws = full_set_draws(c, 100000);
  const DmpAnalysis a(d.config, d.geometry, UpdateMode::kWithoutUpdate);
  const unsigned full = (1u << c.K) - 1u;
  double worst = 0.0;
  std::string where;
  for (int k = 0; k < c.K; ++k) {
    for (double y : {0.5, 1.0, 1.5, 2.0}) {
      const auto& r = draws.rate[std::size_t(k)];
      const double emp = double(std::count_if(r.begin(), r.end(), [&](double x) { return x >= y; })) / double(r.size());
      const double pred = a.rate_ccdf(k, full, y).probability;
      if (std::abs(pred - emp) > worst) {
        worst = std::abs(pred - emp);
        where = fmt("SU %d, y=%.1f: analysis %.4f, empirical %.4f", k, y, pred, emp);
      }
    }
  }
  return {worst <= 0.05, fmt("max |deviation| %.4f at %s", worst, where.c_str())};
}

Verdict recursion_accuracy() {
  const NetworkConfig c = desk();
  TrialOptions o;
  o.mdml = false;
  const Campaign sim = run_campaign(c, 1, 10000, 1, o);
  const CampaignSummary ana = run_analysis(c, 1, 1);
  bool ok = true;
  std::string d;
  for (const char* algo : {"dmp", "dmp_noupdate"}) {
    for (const char* m : {"cardinality", "k_star_star"}) {
      const double diff = ana.at(algo, m).mean - sim.summary.at(algo, m).mean;
      ok = ok && std::abs(diff) <= 0.3;
      d += fmt("%s %s %+.3f; ", algo, m, diff);
    }
    for (int l = 0; l < c.L; ++l) {
      const std::string m = "il_" + std::to_string(l);
      const double rel = ana.at(algo, m).mean / sim.summary.at(algo, m).mean - 1.0;
      ok = ok && std::abs(rel) <= 0.10;
      d += fmt("%s %s %+.1f%%; ", algo, m.c_str(), 100 * rel);
    }
  }
  return {ok, d};
}

Verdict interference_control() {
  NetworkConfig c = base(10, 128, 4);
  c.eps1 = c.csi_error_pr();
  const Campaign camp = run_campaign(c, 50, 200, 1);
  bool ok = true;
  double worst = 0.0;
  for (const char* algo : {"dmp", "dmp_noupdate", "mdml"}) {
    for (int l = 0; l < c.L; ++l) {
      const double m = camp.summary.at(algo, "il_" + std::to_string(l)).mean;
      worst = std::max(worst, m / c.I0);
      ok = ok && m <= c.I0;
    }
  }
  return {ok, fmt("largest mean I_l / I0 over algorithms and PRs: %.4f", worst)};
}

Verdict margin_trend() {
  NetworkConfig c = base(10, 128, 4);
  TrialOptions o;
  o.dmp_noupdate = false;
  o.mdml = false;
  const auto pts = sweep(c, SweepAxis::kEps2Scale, {0.25, 1.0, 4.0}, 50, 200, 1, o);
  std::vector<std::vector<double>> ks;
  for (const auto& p : pts) ks.push_back(per_trial(p.campaign->records, Algorithm::kDmp, true));
  const auto lo = paired_difference(ks[1], ks[0]);
  const auto hi = paired_difference(ks[1], ks[2]);
  const bool ok = lo.mean >= -lo.stderr_ && hi.mean >= -hi.stderr_;
  return {ok, fmt("mean K**: 0.25x %.4f, 1x %.4f, 4x %.4f; 1x-0.25x %+.4f (se %.4f), 1x-4x %+.4f (se %.4f)",
                  mean_stderr(ks[0]).mean, mean_stderr(ks[1]).mean, mean_stderr(ks[2]).mean, lo.mean, lo.stderr_,
                  hi.mean, hi.stderr_)};
}

Verdict dmp_vs_mdml() {
  NetworkConfig c = base(20, 128, 4);
  c.r0_mode = RateTargetMode::kUniform;
  c.r0_max = 4.0;
  TrialOptions o;
  o.dmp_noupdate = false;
  const Campaign camp = run_campaign(c, 50, 200, 1, o);
  const auto d = paired_difference(per_trial(camp.records, Algorithm::kDmp, true),
                                   per_trial(camp.records, Algorithm::kMdml, true));
  return {d.mean >= d.stderr_, fmt("mean K** dmp %.4f, mdml %.4f, difference %+.4f (se %.4f)",
                                   camp.summary.at("dmp", "k_star_star").mean,
                                   camp.summary.at("mdml", "k_star_star").mean, d.mean, d.stderr_)};
}

Verdict threshold_trend() {
  NetworkConfig c = base(20, 128, 4);
  TrialOptions o;
  o.dmp_noupdate = false;
  o.mdml = false;
  const auto pts = sweep(c, SweepAxis::kI0, {-110.0, -100.0}, 50, 200, 1, o);
  const double lo = pts[0].campaign->summary.at("dmp", "k_star_star").mean;
  const double hi = pts[1].campaign->summary.at("dmp", "k_star_star").mean;
  const double ratio = hi / lo;
  return {ratio >= 1.2 && ratio <= 1.8, fmt("mean K** %.3f at -110 dBm, %.3f at -100 dBm, ratio %.3f", lo, hi, ratio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"zf-correctness", zf_correctness},
      {"perfect-csi-law", perfect_csi},
      {"sinr-loss-arithmetic", sinr_loss},
      {"p2-optimality", p2_optimality},
      {"ordering", ordering},
      {"near-optimality-large-m", near_optimality},
      {"theorem1-fit", theorem1_fit},
      {"theorem2-fit", theorem2_fit},
      {"recursion-accuracy", recursion_accuracy},
      {"interference-control", interference_control},
      {"margin-optimality-trend", margin_trend},
      {"dmp-vs-mdml", dmp_vs_mdml},
      {"interference-threshold-trend", threshold_trend},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
