#include "qosmimo/select.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "qosmimo/alloc.hpp"
#include "qosmimo/errors.hpp"
#include "qosmimo/kernels.hpp"

namespace qosmimo {

std::string_view algorithm_tag(Algorithm a) {
  switch (a) {
    case Algorithm::kDmp: return "dmp";
    case Algorithm::kDmpNoUpdate: return "dmp_noupdate";
    case Algorithm::kMdml: return "mdml";
    case Algorithm::kOptimal: return "optimal";
    case Algorithm::kP2Oracle: return "p2_oracle";
  }
  return "unknown";
}

double SelectionOutcome::total_power() const { return std::accumulate(powers.begin(), powers.end(), 0.0); }

double PerformanceReport::max_interference() const {
  return pr_interference.empty() ? 0.0 : *std::max_element(pr_interference.begin(), pr_interference.end());
}

double PerformanceReport::mean_interference() const {
  if (pr_interference.empty()) return 0.0;
  return std::accumulate(pr_interference.begin(), pr_interference.end(), 0.0) /
         static_cast<double>(pr_interference.size());
}

namespace {

std::vector<int> all_users(int K) {
  std::vector<int> s(static_cast<std::size_t>(K));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Index into `values` of the max (or min) entry; ties go to the larger SU index.
std::size_t extreme(std::span<const int> set, std::span<const double> values, bool want_max) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < set.size(); ++i) {
    const bool better = want_max ? values[i] > values[best] : values[i] < values[best];
    if (better || (values[i] == values[best] && set[i] > set[best])) best = i;
  }
  return best;
}

double waterfilled_rate(std::span<const double> lambdas, double budget, std::vector<double>* powers) {
  if (lambdas.empty()) {
    if (powers) powers->clear();
    return 0.0;
  }
  WaterFill wf = waterfill(lambdas, budget);
  const double r = sum_rate(wf.powers, lambdas);
  if (powers) *powers = std::move(wf.powers);
  return r;
}

std::vector<double> powers_for(const CsiView& csi, const NetworkConfig& config, std::span<const int> set) {
  const Eigen::VectorXd g = zf_gains(csi, set);
  const std::span<const double> rev(csi.rev_interference.data(), static_cast<std::size_t>(csi.K()));
  return qos_power(set, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())), rev, config).powers;
}

BeamSet empty_beams(const CsiView& csi) {
  BeamSet b;
  b.vectors.resize(csi.M(), 0);
  b.gains.resize(0);
  b.null_count = 0;
  return b;
}

void check_dimensions(const CsiView& csi, const NetworkConfig& config) {
  if (csi.K() != config.K || csi.L() != config.L || csi.M() != config.M) {
    throw UsageError("CSI dimensions do not match configuration");
  }
}

}  // namespace

DropTrace dmp_core(std::vector<int> initial, double budget, const PowerOracle& powers, bool update) {
  DropTrace t;
  t.set = std::move(initial);
  if (t.set.empty()) return t;
  t.powers = powers(t.set);
  while (!t.set.empty() && sum(t.powers) > budget) {
    const std::size_t j = extreme(t.set, t.powers, /*want_max=*/true);
    t.dropped.push_back(t.set[j]);
    t.set.erase(t.set.begin() + static_cast<std::ptrdiff_t>(j));
    t.powers.erase(t.powers.begin() + static_cast<std::ptrdiff_t>(j));
    if (update && !t.set.empty()) t.powers = powers(t.set);
  }
  return t;
}

DropTrace mdml_core(std::vector<int> initial, double budget, const LambdaOracle& lambdas) {
  DropTrace t;
  t.set = std::move(initial);
  if (t.set.empty()) return t;
  std::vector<double> lam = lambdas(t.set);
  double rate = waterfilled_rate(lam, budget, &t.powers);
  while (!t.set.empty()) {
    const std::size_t j = extreme(t.set, lam, /*want_max=*/false);
    std::vector<int> candidate = t.set;
    candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(j));
    std::vector<double> cand_lam = candidate.empty() ? std::vector<double>{} : lambdas(candidate);
    std::vector<double> cand_powers;
    const double cand_rate = waterfilled_rate(cand_lam, budget, &cand_powers);
    if (!(cand_rate > rate)) break;
    t.dropped.push_back(t.set[j]);
    t.set = std::move(candidate);
    lam = std::move(cand_lam);
    t.powers = std::move(cand_powers);
    rate = cand_rate;
  }
  return t;
}

std::vector<int> p2_core(std::span<const double> powers, double budget) {
  std::vector<int> order(powers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return powers[static_cast<std::size_t>(a)] < powers[static_cast<std::size_t>(b)]; });
  std::vector<int> chosen;
  double total = 0.0;
  for (int i : order) {
    total += powers[static_cast<std::size_t>(i)];
    if (total > budget) break;
    chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

SelectionOutcome dmp(const CsiView& csi, const NetworkConfig& config, bool update_vectors) {
  check_dimensions(csi, config);
  SelectionOutcome out;
  out.algorithm = update_vectors ? Algorithm::kDmp : Algorithm::kDmpNoUpdate;
  out.budget = config.budget();
  const std::vector<int> s0 = all_users(config.K);

  if (update_vectors) {
    DropTrace t = dmp_core(s0, out.budget, [&](std::span<const int> s) { return powers_for(csi, config, s); }, true);
    out.set = std::move(t.set);
    out.powers = std::move(t.powers);
    out.dropped = std::move(t.dropped);
    out.beams = out.set.empty() ? empty_beams(csi) : zf_vectors(csi, out.set);
  } else {
    const BeamSet full = zf_vectors(csi, s0);
    const std::span<const double> rev(csi.rev_interference.data(), static_cast<std::size_t>(csi.K()));
    const std::vector<double> p0 =
        qos_power(s0, std::span<const double>(full.gains.data(), static_cast<std::size_t>(full.gains.size())), rev,
                  config)
            .powers;
    DropTrace t = dmp_core(s0, out.budget, [&](std::span<const int>) { return p0; }, false);
    out.set = std::move(t.set);
    out.powers = std::move(t.powers);
    out.dropped = std::move(t.dropped);
    out.beams = full.restricted(out.set);
  }
  out.iterations = static_cast<int>(out.dropped.size());
  out.feasible = out.total_power() <= out.budget;
  return out;
}

SelectionOutcome mdml(const CsiView& csi, const NetworkConfig& config) {
  check_dimensions(csi, config);
  SelectionOutcome out;
  out.algorithm = Algorithm::kMdml;
  out.budget = config.budget();
  const std::span<const double> rev(csi.rev_interference.data(), static_cast<std::size_t>(csi.K()));
  auto lambdas = [&](std::span<const int> s) {
    const Eigen::VectorXd g = zf_gains(csi, s);
    return equivalent_gain(s, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())), rev, config);
  };
  DropTrace t = mdml_core(all_users(config.K), out.budget, lambdas);
  out.set = std::move(t.set);
  out.powers = std::move(t.powers);
  out.dropped = std::move(t.dropped);
  out.beams = out.set.empty() ? empty_beams(csi) : zf_vectors(csi, out.set);
  out.iterations = static_cast<int>(out.dropped.size());
  out.feasible = out.total_power() <= out.budget * (1.0 + 1e-12);
  return out;
}

SelectionOutcome exhaustive_optimal(const CsiView& csi, const NetworkConfig& config) {
  check_dimensions(csi, config);
  if (config.K > kExhaustiveMaxK) {
    throw UsageError("exhaustive_optimal: K=" + std::to_string(config.K) + " exceeds the guard of " +
                     std::to_string(kExhaustiveMaxK) + "; use dmp or oracle_p2 instead");
  }
  SelectionOutcome out;
  out.algorithm = Algorithm::kOptimal;
  out.budget = config.budget();
  const int K = config.K;

  for (int card = K; card >= 1; --card) {
    // Lexicographic combinations of `card` indices out of K.
    std::vector<int> comb(static_cast<std::size_t>(card));
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      std::vector<double> p = powers_for(csi, config, comb);
      if (sum(p) <= out.budget) {
        out.set = comb;
        out.powers = std::move(p);
        out.beams = zf_vectors(csi, out.set);
        out.feasible = true;
        for (int k = 0; k < K; ++k)
          if (!std::binary_search(out.set.begin(), out.set.end(), k)) out.dropped.push_back(k);
        out.iterations = static_cast<int>(out.dropped.size());
        return out;
      }
      int i = card - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == K - card + i) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < card; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  out.beams = empty_beams(csi);
  out.dropped = all_users(K);
  out.iterations = K;
  out.feasible = true;
  return out;
}

SelectionOutcome oracle_p2(const CsiView& csi, const NetworkConfig& config) {
  check_dimensions(csi, config);
  if (config.K > kP2OracleMaxK) {
    throw UsageError("oracle_p2: K=" + std::to_string(config.K) + " exceeds the guard of " +
                     std::to_string(kP2OracleMaxK));
  }
  SelectionOutcome out;
  out.algorithm = Algorithm::kP2Oracle;
  out.budget = config.budget();
  const std::vector<int> s0 = all_users(config.K);
  const BeamSet full = zf_vectors(csi, s0);
  const std::span<const double> rev(csi.rev_interference.data(), static_cast<std::size_t>(csi.K()));
  const std::vector<double> p0 =
      qos_power(s0, std::span<const double>(full.gains.data(), static_cast<std::size_t>(full.gains.size())), rev,
                config)
          .powers;
  out.set = p2_core(p0, out.budget);
  for (int k : out.set) out.powers.push_back(p0[static_cast<std::size_t>(k)]);
  for (int k : s0)
    if (!std::binary_search(out.set.begin(), out.set.end(), k)) out.dropped.push_back(k);
  out.iterations = static_cast<int>(out.dropped.size());
  out.beams = full.restricted(out.set);
  out.feasible = out.total_power() <= out.budget;
  return out;
}

PerformanceReport evaluate(const ChannelRealization& ch, const SelectionOutcome& outcome,
                           std::span<const double> rev_int, const NetworkConfig& config) {
  const auto s = static_cast<std::size_t>(outcome.set.size());
  if (static_cast<std::size_t>(outcome.beams.size()) != s || outcome.beams.set != outcome.set) {
    throw UsageError("evaluate: beams do not match the selected set");
  }
  const auto M = static_cast<std::size_t>(ch.M());
  PerformanceReport rep;
  rep.sum_power = outcome.total_power();
  rep.pr_interference.assign(static_cast<std::size_t>(ch.L()), 0.0);
  rep.achieved_rates.resize(s);

  const std::complex<double>* beams = outcome.beams.vectors.data();
  std::vector<double> g(s);
  for (std::size_t i = 0; i < s; ++i) {
    const int k = outcome.set[i];
    kernels::dot_abs2_batch(ch.h_su.col(k).data(), beams, M, M, s, g.data());
    double interference = 0.0;
    for (std::size_t j = 0; j < s; ++j)
      if (j != i) interference += outcome.powers[j] * g[j];
    const double sinr =
        outcome.powers[i] * g[i] / (config.sigma_w2 + rev_int[static_cast<std::size_t>(k)] + interference);
    rep.achieved_rates[i] = std::log2(1.0 + sinr);
    if (rep.achieved_rates[i] >= config.rate_target(k) - kRateTolerance) ++rep.satisfied;
  }
  for (int l = 0; l < ch.L(); ++l) {
    kernels::dot_abs2_batch(ch.h_pr.col(l).data(), beams, M, M, s, g.data());
    double il = 0.0;
    for (std::size_t i = 0; i < s; ++i) il += outcome.powers[i] * g[i];
    rep.pr_interference[static_cast<std::size_t>(l)] = il;
  }
  return rep;
}

}  // namespace qosmimo
