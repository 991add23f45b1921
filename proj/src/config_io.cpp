#include "qosmimo/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "qosmimo/errors.hpp"

namespace qosmimo {

using nlohmann::json;

namespace {

// Keys holding a power, accepted with a `_dbm` suffix as well.
const std::set<std::string, std::less<>> kPowerKeys = {"P0", "Pp", "I0", "sigma_w2", "eps1", "eps2",
                                                       "sigma_delta2", "sigma_Delta2"};

const std::set<std::string, std::less<>> kPlainKeys = {
    "M", "K", "L", "R0", "r0_mode", "r0_max", "eps1_scale", "eps2_scale", "cell_radius_m", "min_distance_m",
    "pathloss_exp", "pathloss_ref_gain", "shadow_sigma_db", "seed", "fixed_su_beta", "fixed_pt_su_beta",
    "fixed_pr_beta", "n_locations", "n_channels", "jobs", "oracles", "config_hash"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

ConfigFile config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<std::string> unknown;
  for (const auto& [key, value] : j.items()) {
    std::string_view base = key;
    if (ends_with(base, "_dbm")) base.remove_suffix(4);
    if (!kPlainKeys.count(key) && !kPowerKeys.count(base)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  ConfigFile out;
  NetworkConfig& c = out.network;
  auto power = [&](const std::string& key, auto assign) {
    const bool w = j.contains(key);
    const bool d = j.contains(key + "_dbm");
    if (w && d) throw ConfigError("config gives both '" + key + "' and '" + key + "_dbm'");
    if (w && !j.at(key).is_null()) assign(get_as<double>(j, key));
    if (d) assign(dbm_to_watts(get_as<double>(j, key + "_dbm")));
  };
  auto integer = [&](const char* key, int& field) {
    if (j.contains(key)) field = get_as<int>(j, key);
  };
  auto real = [&](const char* key, double& field) {
    if (j.contains(key)) field = get_as<double>(j, key);
  };

  integer("M", c.M);
  integer("K", c.K);
  integer("L", c.L);
  power("P0", [&](double v) { c.P0 = v; });
  power("Pp", [&](double v) { c.Pp = v; });
  power("I0", [&](double v) { c.I0 = v; });
  power("sigma_w2", [&](double v) { c.sigma_w2 = v; });
  power("sigma_delta2", [&](double v) { c.sigma_delta2 = v; });
  power("sigma_Delta2", [&](double v) { c.sigma_Delta2 = v; });

  if (j.contains("r0_mode")) {
    const auto mode = get_as<std::string>(j, "r0_mode");
    if (mode == "fixed") c.r0_mode = RateTargetMode::kFixed;
    else if (mode == "uniform") c.r0_mode = RateTargetMode::kUniform;
    else throw ConfigError("r0_mode must be 'fixed' or 'uniform'");
  }
  real("r0_max", c.r0_max);
  if (j.contains("R0")) {
    if (j.at("R0").is_array()) c.R0 = get_as<std::vector<double>>(j, "R0");
    else c.R0.assign(static_cast<std::size_t>(std::max(c.K, 0)), get_as<double>(j, "R0"));
  } else {
    c.R0.assign(static_cast<std::size_t>(std::max(c.K, 0)), 1.0);
  }

  // Margins default to the CSI-error compensation values.
  const Margins m{c.csi_error_pr(), c.P0 * c.csi_error_su()};
  const double s1 = j.contains("eps1_scale") ? get_as<double>(j, "eps1_scale") : 1.0;
  const double s2 = j.contains("eps2_scale") ? get_as<double>(j, "eps2_scale") : 1.0;
  c.eps1 = s1 * m.eps1;
  c.eps2 = s2 * m.eps2;
  if (j.contains("eps1_scale") && (j.contains("eps1") || j.contains("eps1_dbm")))
    throw ConfigError("config gives both 'eps1' and 'eps1_scale'");
  if (j.contains("eps2_scale") && (j.contains("eps2") || j.contains("eps2_dbm")))
    throw ConfigError("config gives both 'eps2' and 'eps2_scale'");
  power("eps1", [&](double v) { c.eps1 = v; });
  power("eps2", [&](double v) { c.eps2 = v; });

  real("cell_radius_m", c.cell_radius_m);
  real("min_distance_m", c.min_distance_m);
  real("pathloss_exp", c.pathloss_exp);
  real("pathloss_ref_gain", c.pathloss_ref_gain);
  real("shadow_sigma_db", c.shadow_sigma_db);
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("fixed_su_beta")) c.fixed_su_beta = get_as<std::vector<double>>(j, "fixed_su_beta");
  if (j.contains("fixed_pt_su_beta")) c.fixed_pt_su_beta = get_as<std::vector<double>>(j, "fixed_pt_su_beta");
  if (j.contains("fixed_pr_beta")) c.fixed_pr_beta = get_as<std::vector<double>>(j, "fixed_pr_beta");

  integer("n_locations", out.run.n_locations);
  integer("n_channels", out.run.n_channels);
  integer("jobs", out.run.jobs);
  if (j.contains("oracles")) out.run.oracles = get_as<bool>(j, "oracles");
  if (out.run.n_locations < 1 || out.run.n_channels < 1) throw ConfigError("n_locations and n_channels must be >= 1");
  if (out.run.jobs < 1) throw ConfigError("jobs must be >= 1");
  return out;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json network_to_json(const NetworkConfig& c) {
  json j;
  j["M"] = c.M;
  j["K"] = c.K;
  j["L"] = c.L;
  j["P0"] = c.P0;
  j["Pp"] = c.Pp;
  j["I0"] = c.I0;
  j["sigma_w2"] = c.sigma_w2;
  j["R0"] = c.R0;
  j["r0_mode"] = c.r0_mode == RateTargetMode::kFixed ? "fixed" : "uniform";
  j["r0_max"] = c.r0_max;
  j["eps1"] = c.eps1;
  j["eps2"] = c.eps2;
  j["sigma_delta2"] = c.sigma_delta2 ? json(*c.sigma_delta2) : json(nullptr);
  j["sigma_Delta2"] = c.sigma_Delta2 ? json(*c.sigma_Delta2) : json(nullptr);
  j["cell_radius_m"] = c.cell_radius_m;
  j["min_distance_m"] = c.min_distance_m;
  j["pathloss_exp"] = c.pathloss_exp;
  j["pathloss_ref_gain"] = c.pathloss_ref_gain;
  j["shadow_sigma_db"] = c.shadow_sigma_db;
  j["seed"] = c.seed;
  if (c.has_fixed_geometry()) {
    j["fixed_su_beta"] = c.fixed_su_beta;
    j["fixed_pt_su_beta"] = c.fixed_pt_su_beta;
    j["fixed_pr_beta"] = c.fixed_pr_beta;
  }
  return j;
}

json config_to_json(const ConfigFile& c) {
  json j = network_to_json(c.network);
  j["n_locations"] = c.run.n_locations;
  j["n_channels"] = c.run.n_channels;
  j["jobs"] = c.run.jobs;
  j["oracles"] = c.run.oracles;
  j["config_hash"] = config_hash(c.network);
  return j;
}

void apply_override(json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  std::string base = key;
  if (ends_with(base, "_dbm")) base.resize(base.size() - 4);
  if (kPowerKeys.count(base)) {
    j.erase(base);
    j.erase(base + "_dbm");
    if (base == "eps1" || base == "eps2") j.erase(base + "_scale");
  }
  if (key == "eps1_scale") j.erase("eps1"), j.erase("eps1_dbm");
  if (key == "eps2_scale") j.erase("eps2"), j.erase("eps2_dbm");
  j[key] = value;
}

void apply_overrides(json& j, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) apply_override(j, a);
}

std::string config_hash(const NetworkConfig& c) {
  const std::string text = network_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qosmimo
