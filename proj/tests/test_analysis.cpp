#include <doctest.h>

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "qosmimo/alloc.hpp"
#include "qosmimo/analysis.hpp"
#include "qosmimo/beamform.hpp"
#include "qosmimo/channel.hpp"
#include "qosmimo/errors.hpp"
#include "qosmimo/select.hpp"

using namespace qosmimo;

namespace {

// Small fixed instance shared with tests/oracles/analysis_reference.py.
NetworkConfig reference_config() {
  NetworkConfig c;
  c.M = 16;
  c.K = 3;
  c.L = 1;
  c.R0 = {1.0, 1.5, 2.0};
  c.sigma_w2 = 1e-13;
  c.Pp = 0.1;
  c.P0 = 10.0;
  c.eps1 = 1e-12;
  c.eps2 = 1e-13;
  c.I0 = 6e-14;
  c.sigma_delta2 = 3e-12;
  c.fixed_su_beta = {2e-11, 1e-11, 5e-12};
  c.fixed_pt_su_beta = {1e-11, 2e-11, 5e-12};
  c.fixed_pr_beta = {1e-10};
  return c;
}

Geometry betas_of(const NetworkConfig& c) {
  Rng r(0);
  return sample_geometry(c, r);
}

NetworkConfig desk_config(int K, int M, int L) {
  NetworkConfig c;
  c.M = M;
  c.K = K;
  c.L = L;
  c.R0.assign(static_cast<std::size_t>(K), 1.0);
  return c;
}

}  // namespace

TEST_CASE("power distribution basics") {
  const auto g = PowerDistribution::gamma({2.0, 3.0});
  CHECK(g.mean() == 6.0);
  CHECK(g.variance() == 18.0);
  CHECK(g.cdf(4.0) + g.sf(4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.cdf(4.0) == doctest::Approx(oracle::gamma_p(2.0, 4.0 / 3.0)).epsilon(1e-12));
  CHECK(g.quantile(g.cdf(5.0)) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(g.scaled(2.0).mean() == doctest::Approx(12.0));
  const auto p = PowerDistribution::point(2.0);
  CHECK(p.cdf(1.999) == 0.0);
  CHECK(p.cdf(2.0) == 1.0);
  CHECK_THROWS_AS(p.pdf(2.0), UsageError);
  CHECK(PowerDistribution::from_moments(3.0, 0.0).is_point_mass());
  CHECK_THROWS_AS(PowerDistribution::gamma({0.0, 1.0}), DomainError);
}

TEST_CASE("Theorem 1 fit") {
  SUBCASE("single interferer without noise is exactly exponential") {
    NetworkConfig c = desk_config(2, 16, 1);
    c.sigma_w2 = 0.0;
    c.eps2 = 0.0;
    c.sigma_delta2 = 0.0;
    c.fixed_su_beta = {1e-11, 2e-11};
    c.fixed_pt_su_beta = {3e-12, 4e-12};
    c.fixed_pr_beta = {1e-10};
    const auto fit = theorem1_params(1, UpdateMode::kWithUpdate, 2, c, betas_of(c));
    CHECK(fit.x.params().shape == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.x.params().scale == doctest::Approx(c.Pp * 4e-12).epsilon(1e-12));
    CHECK(fit.gamma == doctest::Approx(1.0 / (2e-11 * 14)).epsilon(1e-12));
  }

  SUBCASE("mean identity over random inputs") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int rep = 0; rep < 200; ++rep) {
      NetworkConfig c = desk_config(3, 64, 1 + rep % 4);
      c.sigma_w2 = u(gen) * 1e-13;
      c.eps2 = u(gen) * 1e-13;
      c.Pp = u(gen) * 0.1;
      c.fixed_su_beta = {u(gen) * 1e-11, u(gen) * 1e-11, u(gen) * 1e-11};
      c.fixed_pt_su_beta.clear();
      for (int i = 0; i < 3 * c.L; ++i) c.fixed_pt_su_beta.push_back(u(gen) * 1e-11);
      c.fixed_pr_beta.assign(static_cast<std::size_t>(c.L), 1e-10);
      const Geometry b = betas_of(c);
      for (int k = 0; k < 3; ++k) {
        const auto fit = theorem1_params(k, UpdateMode::kWithoutUpdate, 0, c, b);
        double mean = c.sigma_w2 + c.eps2, var = 0.0;
        for (int l = 0; l < c.L; ++l) {
          mean += c.Pp * b.pt_su(l, k);
          var += std::pow(c.Pp * b.pt_su(l, k), 2);
        }
        CHECK(std::abs(fit.x.mean() / mean - 1.0) <= 1e-12);
        CHECK(std::abs(fit.x.variance() / var - 1.0) <= 1e-12);
      }
    }
  }

  SUBCASE("no primary transmitters gives a point mass") {
    NetworkConfig c = desk_config(2, 8, 0);
    c.fixed_su_beta = {1e-11, 1e-11};
    c.fixed_pt_su_beta = {};
    c.fixed_pr_beta = {};
    const auto fit = theorem1_params(0, UpdateMode::kWithUpdate, 2, c, betas_of(c));
    CHECK(fit.point_mass());
    CHECK(fit.x.point_value() == doctest::Approx(c.sigma_w2 + c.eps2));
  }

  SUBCASE("degrees of freedom guard") {
    NetworkConfig c = desk_config(4, 4, 2);
    Rng r(1);
    const Geometry b = sample_geometry(c, r);
    CHECK_THROWS_AS(theorem1_params(0, UpdateMode::kWithUpdate, 4, c, b), UsageError);
  }
}

TEST_CASE("Theorem 1 mean against simulation at M=128, K=20, L=4") {
  NetworkConfig c = desk_config(20, 128, 4);
  Rng geo = Rng(51).substream(0);
  const Geometry g = sample_geometry(c, geo);
  std::vector<int> all(20);
  std::iota(all.begin(), all.end(), 0);
  const int k = 5;
  const double predicted = theorem1_params(k, UpdateMode::kWithoutUpdate, 0, c, g).power().mean();
  const int n = 10000;
  std::vector<double> samples(n);
  Rng root = Rng(51).substream(1);
  for (int i = 0; i < n; ++i) {
    Rng r = root.substream(static_cast<std::uint64_t>(i));
    const auto ch = sample_channels(g, c.M, r);
    const auto csi = corrupt_csi(ch, c, r);
    const double gain = zf_gains(csi, all)(k);
    samples[i] = qos_power(c.rate_target(k), c.sigma_w2, csi.rev_interference(k), c.eps2, gain);
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  CHECK(std::abs(mean / predicted - 1.0) <= 0.05);
}

TEST_CASE("Corollary 1 sums") {
  const PowerDistribution one[] = {PowerDistribution::gamma({2.5, 0.3})};
  const auto s = corollary1_sum_params(one);
  CHECK(s.params().shape == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(s.params().scale == doctest::Approx(0.3).epsilon(1e-14));

  const PowerDistribution two[] = {PowerDistribution::gamma({1.0, 1.0}), PowerDistribution::gamma({1.0, 1.0})};
  const auto t = corollary1_sum_params(two);
  CHECK(t.params().shape == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t.params().scale == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<PowerDistribution> m;
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < 1 + rep % 7; ++i) {
      m.push_back(PowerDistribution::gamma({u(gen), u(gen)}));
      mean += m.back().mean();
      var += m.back().variance();
    }
    const auto sum = corollary1_sum_params(m);
    CHECK(std::abs(sum.mean() / mean - 1.0) <= 1e-12);
    CHECK(std::abs(sum.variance() / var - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(corollary1_sum_params(std::span<const PowerDistribution>()), UsageError);
}

TEST_CASE("feasibility probability") {
  const PowerDistribution m[] = {PowerDistribution::gamma({1.0, 2.0})};
  CHECK(prob_feasible(m, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(prob_feasible(m, 1e6) == doctest::Approx(1.0));
  double prev = 0.0;
  const PowerDistribution many[] = {PowerDistribution::gamma({1.3, 2.0}), PowerDistribution::gamma({0.4, 5.0})};
  for (double b = 0.0; b < 40.0; b += 0.7) {
    const double f = prob_feasible(many, b);
    CHECK(f >= prev);
    prev = f;
  }
  CHECK(prob_feasible(std::span<const PowerDistribution>(), 0.0) == 1.0);
}

TEST_CASE("max probability") {
  const int idx2[] = {0, 1};
  const PowerDistribution sym[] = {PowerDistribution::gamma({2.0, 1.5}), PowerDistribution::gamma({2.0, 1.5})};
  CHECK(prob_max(sym, idx2, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(prob_drop(sym, idx2, 0, 3.0) ==
        doctest::Approx((1.0 - prob_feasible(sym, 3.0)) / 2.0).epsilon(1e-9));

  const int idx3[] = {0, 1, 2};
  const PowerDistribution ref[] = {PowerDistribution::gamma({2.0, 1.0}), PowerDistribution::gamma({3.0, 0.5}),
                                   PowerDistribution::gamma({0.7, 2.0})};
  CHECK(prob_max(ref, idx3, 0) == doctest::Approx(0.466830278642028).epsilon(1e-8));
  CHECK(prob_max(ref, idx3, 1) == doctest::Approx(0.294305335961193).epsilon(1e-8));
  CHECK(prob_max(ref, idx3, 2) == doctest::Approx(0.238864385396779).epsilon(1e-8));

  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> shape(0.5, 30.0);
  std::lognormal_distribution<double> scale(0.0, 1.5);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + rep % 9;
    std::vector<PowerDistribution> m;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      m.push_back(PowerDistribution::gamma({shape(gen), scale(gen)}));
      idx.push_back(i);
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += prob_max(m, idx, static_cast<std::size_t>(j));
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }

  // Point masses: the larger constant always wins, ties to the higher index.
  const PowerDistribution pts[] = {PowerDistribution::point(1.0), PowerDistribution::point(1.0),
                                   PowerDistribution::gamma({2.0, 1.0})};
  const double p0 = prob_max(pts, idx3, 0), p1 = prob_max(pts, idx3, 1), p2 = prob_max(pts, idx3, 2);
  CHECK(p0 == 0.0);
  CHECK(p1 == doctest::Approx(oracle::gamma_p(2.0, 1.0)).epsilon(1e-12));
  CHECK(p1 + p2 == doctest::Approx(1.0).epsilon(1e-8));
  const PowerDistribution lone[] = {PowerDistribution::gamma({1.0, 1.0})};
  CHECK_THROWS_AS(prob_drop(lone, idx2, 0, 1.0), UsageError);
}

TEST_CASE("subset recursion against the reference instance") {
  const NetworkConfig c = reference_config();
  const Geometry b = betas_of(c);
  struct Expect {
    UpdateMode mode;
    double f0, g01, g02, g12, g0, g1, g2, ek, ekk;
  };
  const Expect cases[] = {
      {UpdateMode::kWithUpdate, 0.727011830626765, 0.12936078132594, 0.138425677208758, 0.00520171083853689,
       0.0100356067734156, 0.00150869992115473, 0.000695358397285909, 2.7146993393085, 0.237371916846113},
      {UpdateMode::kWithoutUpdate, 0.727011830626765, 0.12936078132594, 0.138425677208758, 0.00520171083853689,
       0.0131821004140112, 0.00187939435922461, 0.000898039624034547, 2.71090541658525, 0.235587807424553},
  };
  for (const auto& e : cases) {
    const DmpAnalysis a(c, b, e.mode);
    CHECK(a.feasible(0b111) == doctest::Approx(e.f0).epsilon(1e-9));
    CHECK(a.reach(0b111) == 1.0);
    CHECK(a.reach(0b011) == doctest::Approx(e.g01).epsilon(1e-7));
    CHECK(a.reach(0b101) == doctest::Approx(e.g02).epsilon(1e-7));
    CHECK(a.reach(0b110) == doctest::Approx(e.g12).epsilon(1e-7));
    CHECK(a.reach(0b001) == doctest::Approx(e.g0).epsilon(1e-7));
    CHECK(a.reach(0b010) == doctest::Approx(e.g1).epsilon(1e-7));
    CHECK(a.reach(0b100) == doctest::Approx(e.g2).epsilon(1e-7));
    CHECK(a.expected_selected() == doctest::Approx(e.ek).epsilon(1e-7));
    CHECK(a.expected_satisfied() == doctest::Approx(e.ekk).epsilon(1e-5));
  }
  const DmpAnalysis up(c, b, UpdateMode::kWithUpdate);
  const DmpAnalysis no(c, b, UpdateMode::kWithoutUpdate);
  CHECK(up.rate_ccdf(1, 0b111, 1.0).probability == doctest::Approx(0.989100869084458).epsilon(1e-6));
  CHECK(up.rate_ccdf(2, 0b111, 2.0).probability == doctest::Approx(0.0356251529549907).epsilon(1e-5));
  CHECK(up.rate_ccdf(2, 0b110, 1.5).probability == doctest::Approx(0.81839340460146).epsilon(1e-6));
  CHECK(no.rate_ccdf(2, 0b110, 1.5).probability == doctest::Approx(0.804440144436135).epsilon(1e-6));
  CHECK(up.rate_ccdf(0, 0b011, 0.5).probability == doctest::Approx(0.995546209701827).epsilon(1e-6));
  CHECK(no.rate_ccdf(0, 0b011, 0.5).probability == doctest::Approx(0.994442781989301).epsilon(1e-6));
}

TEST_CASE("recursion identities") {
  SUBCASE("single user") {
    NetworkConfig c = desk_config(1, 8, 1);
    Rng r(3);
    const Geometry g = sample_geometry(c, r);
    const DmpAnalysis a(c, g, UpdateMode::kWithUpdate);
    CHECK(a.reach(0b1) == 1.0);
    c.eps1 = 0.0;
    c.P0 = 1e12;
    CHECK(expected_selected(c, g, UpdateMode::kWithUpdate) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("two symmetric users") {
    NetworkConfig c = desk_config(2, 16, 1);
    c.fixed_su_beta = {1e-11, 1e-11};
    c.fixed_pt_su_beta = {2e-11, 2e-11};
    c.fixed_pr_beta = {1e-10};
    c.I0 = corollary1_sum_params(DmpAnalysis(c, betas_of(c), UpdateMode::kWithUpdate).powers(0b11)).quantile(0.5) *
           c.eps1;
    const DmpAnalysis a(c, betas_of(c), UpdateMode::kWithUpdate);
    const double f = a.feasible(0b11);
    CHECK(f > 0.05);
    CHECK(f < 0.95);
    CHECK(a.reach(0b01) == doctest::Approx((1.0 - f) / 2.0).epsilon(1e-9));
    CHECK(a.reach(0b10) == doctest::Approx((1.0 - f) / 2.0).epsilon(1e-9));
  }

  SUBCASE("mass conservation and unlimited budget") {
    NetworkConfig c = desk_config(6, 32, 2);
    Rng r(4);
    const Geometry g = sample_geometry(c, r);
    for (UpdateMode mode : {UpdateMode::kWithUpdate, UpdateMode::kWithoutUpdate}) {
      const DmpAnalysis a(c, g, mode);
      std::vector<double> mass(7, 0.0);
      double terminated = 0.0;
      for (unsigned m = 1; m < 64; ++m) {
        mass[static_cast<std::size_t>(std::popcount(m))] += a.reach(m);
        terminated += a.reach(m) * a.feasible(m);
      }
      for (double x : mass) CHECK(x <= 1.0 + 1e-9);
      CHECK(a.expected_selected() >= 0.0);
      CHECK(a.expected_selected() <= 6.0);
      CHECK(terminated <= 1.0 + 1e-9);
    }
    c.eps1 = 0.0;
    c.P0 = 1e12;
    CHECK(expected_selected(c, g, UpdateMode::kWithUpdate) == doctest::Approx(6.0).epsilon(1e-12));
  }

  SUBCASE("perfect estimation") {
    NetworkConfig c = desk_config(4, 64, 2);
    c.sigma_delta2 = 0.0;
    Rng r(5);
    const Geometry g = sample_geometry(c, r);
    for (UpdateMode mode : {UpdateMode::kWithUpdate, UpdateMode::kWithoutUpdate}) {
      const DmpAnalysis a(c, g, mode);
      CHECK(a.expected_satisfied() == doctest::Approx(a.expected_selected()).epsilon(1e-9));
    }
    c.sigma_Delta2 = 0.0;
    CHECK(expected_interference(0, c, g, UpdateMode::kWithUpdate) == 0.0);
    CHECK(expected_interference(1, c, g, UpdateMode::kWithoutUpdate) == 0.0);
  }

  SUBCASE("interference term with unit shape") {
    NetworkConfig c = desk_config(2, 16, 1);
    c.sigma_w2 = 0.0;
    c.eps2 = 0.0;
    c.fixed_su_beta = {1e-11, 1e-11};
    c.fixed_pt_su_beta = {2e-11, 3e-11};
    c.fixed_pr_beta = {1e-10};
    const Geometry b = betas_of(c);
    const DmpAnalysis a(c, b, UpdateMode::kWithUpdate);
    const auto fit = theorem1_params(0, UpdateMode::kWithUpdate, 2, c, b);
    CHECK(fit.x.params().shape == doctest::Approx(1.0));
    CHECK(a.expected_interference_term(0, 0b11) ==
          doctest::Approx(fit.gamma * fit.x.params().scale * c.csi_error_pr()).epsilon(1e-12));
  }
}

TEST_CASE("rate CCDF") {
  NetworkConfig c = desk_config(4, 64, 2);
  Rng r(6);
  const Geometry g = sample_geometry(c, r);
  {
    NetworkConfig exact = c;
    exact.sigma_delta2 = 0.0;
    const DmpAnalysis a(exact, g, UpdateMode::kWithUpdate);
    for (int k = 0; k < 4; ++k) CHECK(a.rate_ccdf(k, 0b1111, exact.rate_target(k)).probability == 1.0);
  }
  const DmpAnalysis a(c, g, UpdateMode::kWithUpdate);
  CHECK(a.rate_ccdf(0, 0b1111, 1e-6).probability >= 1.0 - 1e-6);
  double prev = 1.0;
  for (double y = 0.1; y <= 4.0; y += 0.1) {
    const double p = a.rate_ccdf(0, 0b1111, y).probability;
    CHECK(p <= prev + 1e-7);
    prev = p;
  }
  CHECK_THROWS_AS(a.rate_ccdf(0, 0b1110, 1.0), UsageError);
  CHECK_THROWS_AS(a.rate_ccdf(0, 0b1111, 0.0), UsageError);
}

TEST_CASE("dominance gap") {
  NetworkConfig c = desk_config(5, 64, 2);
  Rng r(7);
  const Geometry g = sample_geometry(c, r);
  const int s1[] = {0, 1, 2, 3, 4};
  const int s2[] = {0, 1, 2};
  for (double x : {1e-4, 1e-3, 1e-2, 0.1}) CHECK(dominance_cdf_gap(0, s1, s2, x, c, g) > 0.0);
  CHECK(dominance_cdf_gap(0, s1, s2, 0.0, c, g) == 0.0);

  const auto f1 = theorem1_params(0, UpdateMode::kWithUpdate, 5, c, g);
  const auto f2 = theorem1_params(0, UpdateMode::kWithUpdate, 3, c, g);
  const double x = f1.power().mean();
  const double want = oracle::gamma_q(f1.x.params().shape, x / (f1.gamma * f1.x.params().scale)) -
                      oracle::gamma_q(f2.x.params().shape, x / (f2.gamma * f2.x.params().scale));
  CHECK(std::abs(dominance_cdf_gap(0, s1, s2, x, c, g) - want) <= 1e-10);

  CHECK_THROWS_AS(dominance_cdf_gap(0, s2, s1, x, c, g), UsageError);
  const int s3[] = {1, 2};
  CHECK_THROWS_AS(dominance_cdf_gap(0, s1, s3, x, c, g), UsageError);
}

TEST_CASE("feasibility and drop probabilities against simulation") {
  NetworkConfig c = desk_config(4, 64, 2);
  c.fixed_su_beta = {2.5e-11, 1.5e-11, 1.0e-11, 7.0e-12};
  c.fixed_pt_su_beta = {2.0e-11, 1.0e-11, 3.0e-11, 1.5e-11, 1.0e-11, 2.5e-11, 1.0e-11, 2.0e-11};
  c.fixed_pr_beta = {1e-10, 2e-10};
  const Geometry g = betas_of(c);
  const DmpAnalysis a(c, g, UpdateMode::kWithoutUpdate);
  // Place the budget near the median of the full-set sum.
  const auto sum = corollary1_sum_params(a.powers(0b1111));
  c.I0 = sum.quantile(0.5) * c.eps1;
  const DmpAnalysis at(c, g, UpdateMode::kWithoutUpdate);
  const double budget = c.budget();

  const int n = 20000;
  int feasible = 0;
  std::array<int, 4> drop{};
  std::vector<int> all{0, 1, 2, 3};
  Rng root(61);
  for (int i = 0; i < n; ++i) {
    Rng r = root.substream(static_cast<std::uint64_t>(i));
    const auto ch = sample_channels(g, c.M, r);
    const auto csi = corrupt_csi(ch, c, r);
    const Eigen::VectorXd gains = zf_gains(csi, all);
    const auto alloc = qos_power(all, std::span<const double>(gains.data(), 4),
                                 std::span<const double>(csi.rev_interference.data(), 4), c);
    if (alloc.total <= budget) {
      ++feasible;
    } else {
      const auto it = std::max_element(alloc.powers.begin(), alloc.powers.end());
      ++drop[static_cast<std::size_t>(it - alloc.powers.begin())];
    }
  }
  CHECK(std::abs(at.feasible(0b1111) - static_cast<double>(feasible) / n) <= 0.03);
  const auto members = at.powers(0b1111);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(prob_drop(members, all, j, budget) - static_cast<double>(drop[j]) / n) <= 0.03);
}

TEST_CASE("guards and mask helpers") {
  NetworkConfig c = desk_config(11, 64, 1);
  Rng r(8);
  const Geometry g = sample_geometry(c, r);
  try {
    DmpAnalysis a(c, g, UpdateMode::kWithUpdate);
    FAIL("expected the guard to refuse");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("guard of 10") != std::string::npos);
  }
  const int s[] = {0, 3, 4};
  CHECK(set_to_mask(s) == 0b11001u);
  CHECK(mask_to_set(0b11001u) == std::vector<int>{0, 3, 4});
}
