// SPDX-License-Identifier: Apache-2.0
#include "risgee/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "risgee/scenario.hpp"

namespace risgee::config_io {

namespace {

const std::set<std::string>& integer_fields() {
  static const std::set<std::string> names = {"users", "bs_antennas", "ris_elements", "seed"};
  return names;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

void check_type(const std::string& key, const nlohmann::json& value) {
  if (integer_fields().count(key)) {
    const bool negative = value.is_number_integer() && !value.is_number_unsigned() &&
                          value.get<std::int64_t>() < 0;
    if (!value.is_number_integer() || negative) {
      throw ConfigError("config field '" + key + "' must be a non-negative integer");
    }
  } else if (!value.is_number()) {
    throw ConfigError("config field '" + key + "' must be a number");
  }
}

}  // namespace

nlohmann::json default_document() {
  return {
      {"users", 4},
      {"bs_antennas", 4},
      {"ris_elements", 100},
      {"bandwidth_mhz", 20.0},
      {"p_max_dbw", 0.0},
      {"mu", 1.0},
      {"p0_dbm", 40.0},
      {"p0_ris_dbm", 30.0},
      {"pcn_dbm", 0.0},
      {"pr_max_dbw", 10.0},
      {"passive_pcn_dbm", 0.0},
      {"passive_p0_ris_dbm", 20.0},
      {"noise_psd_dbm_hz", -174.0},
      {"noise_figure_db", 10.0},
      {"ris_noise_figure_db", 10.0},
      {"area_radius_m", 100.0},
      {"bs_distance_m", 50.0},
      {"ris_height_m", 15.0},
      {"bs_height_m", 10.0},
      {"user_height_max_m", 5.0},
      {"pathloss_exponent", 4.0},
      {"ref_distance_m", 1.0},
      {"ref_gain_db", 0.0},
      {"rice_k_ris_bs", 4.0},
      {"rice_k_user_ris", 2.0},
      {"seed", 1},
  };
}

std::vector<std::string> field_names() {
  std::vector<std::string> out;
  const nlohmann::json doc = default_document();
  for (const auto& item : doc.items()) out.push_back(item.key());
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json merge(const nlohmann::json& base, const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw ConfigError("configuration must be a JSON object");
  nlohmann::json out = base;
  for (const auto& item : overrides.items()) {
    if (!base.contains(item.key())) {
      throw ConfigError("unknown config field '" + item.key() + "'");
    }
    check_type(item.key(), item.value());
    out[item.key()] = item.value();
  }
  return out;
}

nlohmann::json apply_env(const nlohmann::json& doc,
                         const std::function<std::optional<std::string>(const std::string&)>&
                             getenv_fn) {
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& item : doc.items()) {
    const std::string var = std::string(kEnvPrefix) + upper(item.key());
    const auto raw = getenv_fn(var);
    if (!raw) continue;
    try {
      overrides[item.key()] = nlohmann::json::parse(*raw);
    } catch (const nlohmann::json::parse_error&) {
      throw ConfigError("environment variable " + var + "='" + *raw + "' is not a number");
    }
  }
  return merge(doc, overrides);
}

nlohmann::json apply_env(const nlohmann::json& doc) {
  return apply_env(doc, [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  });
}

nlohmann::json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

ScenarioConfig to_config(const nlohmann::json& doc) {
  const nlohmann::json full = merge(default_document(), doc);
  auto num = [&](const char* key) { return full.at(key).get<double>(); };
  auto count = [&](const char* key) {
    const auto v = full.at(key).get<std::int64_t>();
    if (v < 1 || v > 100000) {
      throw ConfigError(std::string("config field '") + key + "' must be in [1, 100000]");
    }
    return static_cast<int>(v);
  };

  ScenarioConfig cfg;
  cfg.ris_elements = count("ris_elements");
  cfg.bs_antennas = count("bs_antennas");
  const int users = count("users");
  set_uniform_users(cfg, users, dbw_to_watts(num("p_max_dbw")), num("mu"));
  cfg.bandwidth_hz = num("bandwidth_mhz") * 1e6;
  cfg.p0_w = dbm_to_watts(num("p0_dbm"));
  cfg.p0_ris_w = dbm_to_watts(num("p0_ris_dbm"));
  cfg.pcn_w = dbm_to_watts(num("pcn_dbm"));
  cfg.pr_max_w = dbw_to_watts(num("pr_max_dbw"));
  cfg.passive_pcn_w = dbm_to_watts(num("passive_pcn_dbm"));
  cfg.passive_p0_ris_w = dbm_to_watts(num("passive_p0_ris_dbm"));
  if (!(cfg.bandwidth_hz > 0.0)) throw ConfigError("config field 'bandwidth_mhz' must be > 0");
  cfg.sigma2_w = scenario::noise_power(num("noise_psd_dbm_hz"), num("noise_figure_db"),
                                       cfg.bandwidth_hz);
  cfg.sigma2_ris_w = scenario::noise_power(num("noise_psd_dbm_hz"), num("ris_noise_figure_db"),
                                           cfg.bandwidth_hz);
  cfg.geometry.area_radius_m = num("area_radius_m");
  cfg.geometry.bs_distance_m = num("bs_distance_m");
  cfg.geometry.ris_height_m = num("ris_height_m");
  cfg.geometry.bs_height_m = num("bs_height_m");
  cfg.geometry.user_height_max_m = num("user_height_max_m");
  cfg.pathloss_exponent = num("pathloss_exponent");
  cfg.ref_distance_m = num("ref_distance_m");
  cfg.ref_gain = db_to_linear(num("ref_gain_db"));
  cfg.rice_k_ris_bs = num("rice_k_ris_bs");
  cfg.rice_k_user_ris = num("rice_k_user_ris");
  cfg.seed = full.at("seed").get<std::uint64_t>();
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace risgee::config_io
