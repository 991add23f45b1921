#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "qosmimo/model.hpp"

namespace qosmimo {

/// Campaign size and execution settings that travel with a config file.
struct RunSettings {
  int n_locations = 50;
  int n_channels = 200;
  int jobs = 1;
  bool oracles = false;
};

struct ConfigFile {
  NetworkConfig network;
  RunSettings run;
};

/// Flat-key JSON. Powers may be given in watts (`I0`) or dBm (`I0_dbm`);
/// a scalar `R0` is broadcast to K entries; missing margins default to
/// sigma_Delta^2 and P0 sigma_delta^2, optionally scaled by `eps1_scale` and
/// `eps2_scale`. Unknown keys raise ConfigError.
ConfigFile config_from_json(const nlohmann::json& j);
ConfigFile load_config(const std::filesystem::path& path);

/// Canonical form: every field, powers in watts, full round-trip precision.
nlohmann::json config_to_json(const ConfigFile& c);
nlohmann::json network_to_json(const NetworkConfig& c);

/// "key=value" applied to the raw JSON; the value is parsed as JSON when
/// possible, otherwise taken as a string. Setting `X` removes `X_dbm` and vice versa.
void apply_override(nlohmann::json& j, std::string_view assignment);
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& assignments);

/// 16 hex digits of FNV-1a over the canonical network dump.
std::string config_hash(const NetworkConfig& c);

}  // namespace qosmimo
