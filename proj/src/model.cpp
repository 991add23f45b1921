#include "qosmimo/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qosmimo/errors.hpp"

namespace qosmimo {

SingularityError::SingularityError(std::vector<int> set, double condition)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "rank-deficient channel matrix for set {";
        for (std::size_t i = 0; i < set.size(); ++i) os << (i ? "," : "") << set[i];
        os << "} (condition estimate " << condition << ")";
        return os.str();
      }()),
      set_(std::move(set)),
      condition_(condition) {}

InfinitePowerError::InfinitePowerError(int su)
    : DomainError("zero effective gain for SU " + std::to_string(su) + ": required power is infinite"),
      su_(su) {}

double NetworkConfig::csi_error_su() const { return sigma_delta2.value_or(sigma_w2 / P0); }

double NetworkConfig::csi_error_pr() const { return sigma_Delta2.value_or(sigma_w2 / Pp); }

double NetworkConfig::budget() const {
  if (eps1 <= 0.0) return P0;
  return std::min(I0 / eps1, P0);
}

double dbm_to_watts(double dbm) {
  if (!std::isfinite(dbm)) throw DomainError("dbm_to_watts: non-finite input");
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watts_to_dbm(double watts) {
  if (!(watts > 0.0) || !std::isfinite(watts)) {
    throw DomainError("watts_to_dbm: power must be positive and finite");
  }
  return 10.0 * std::log10(watts) + 30.0;
}

std::vector<std::string> validate(const NetworkConfig& c) {
  std::vector<std::string> errors;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(std::string(name) + " must be positive");
  };
  auto nonnegative = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) errors.push_back(std::string(name) + " must be non-negative");
  };

  if (c.K < 1) errors.emplace_back("K must be at least 1");
  if (c.L < 0) errors.emplace_back("L must be non-negative");
  if (c.M < c.K + c.L) errors.emplace_back("M < K+L: zero-forcing needs M >= K+L");

  positive(c.P0, "P0");
  positive(c.Pp, "Pp");
  positive(c.I0, "I0");
  positive(c.sigma_w2, "sigma_w2");
  nonnegative(c.eps1, "eps1");
  nonnegative(c.eps2, "eps2");
  if (c.sigma_delta2) nonnegative(*c.sigma_delta2, "sigma_delta2");
  if (c.sigma_Delta2) nonnegative(*c.sigma_Delta2, "sigma_Delta2");

  if (c.r0_mode == RateTargetMode::kFixed) {
    if (c.K >= 1 && c.R0.size() != static_cast<std::size_t>(c.K)) {
      errors.push_back("R0 has " + std::to_string(c.R0.size()) + " entries, expected K=" + std::to_string(c.K));
    }
    if (std::any_of(c.R0.begin(), c.R0.end(), [](double r) { return !(r > 0.0) || !std::isfinite(r); })) {
      errors.emplace_back("R0 entries must be positive");
    }
  } else {
    positive(c.r0_max, "r0_max");
  }

  positive(c.cell_radius_m, "cell_radius_m");
  nonnegative(c.min_distance_m, "min_distance_m");
  if (c.min_distance_m >= c.cell_radius_m) errors.emplace_back("min_distance_m must be below cell_radius_m");
  positive(c.pathloss_exp, "pathloss_exp");
  positive(c.pathloss_ref_gain, "pathloss_ref_gain");
  nonnegative(c.shadow_sigma_db, "shadow_sigma_db");

  if (c.has_fixed_geometry()) {
    const auto K = static_cast<std::size_t>(std::max(c.K, 0));
    const auto L = static_cast<std::size_t>(std::max(c.L, 0));
    if (c.fixed_su_beta.size() != K) errors.emplace_back("fixed_su_beta must have K entries");
    if (c.fixed_pt_su_beta.size() != L * K) errors.emplace_back("fixed_pt_su_beta must have L*K entries");
    if (c.fixed_pr_beta.size() != L) errors.emplace_back("fixed_pr_beta must have L entries");
    auto all_positive = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double b) { return b > 0.0 && std::isfinite(b); });
    };
    if (!all_positive(c.fixed_su_beta) || !all_positive(c.fixed_pt_su_beta) || !all_positive(c.fixed_pr_beta)) {
      errors.emplace_back("fixed gains must be positive");
    }
  }
  return errors;
}

void require_valid(const NetworkConfig& config) {
  auto errors = validate(config);
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw ConfigError(msg);
}

Margins default_margins(const NetworkConfig& config) {
  if (!(config.Pp > 0.0) || !(config.P0 > 0.0)) {
    throw DomainError("default_margins: transmit powers must be positive");
  }
  if (!(config.sigma_w2 > 0.0)) throw DomainError("default_margins: noise power must be positive");
  return {config.csi_error_pr(), config.P0 * config.csi_error_su()};
}

}  // namespace qosmimo
