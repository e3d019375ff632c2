// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "risgee/config.hpp"

// JSON configuration documents. Field names carry their units; values in dB
// are converted to linear SI units when the ScenarioConfig is built.

namespace risgee::config_io {

inline constexpr std::string_view kEnvPrefix = "RISGEE_";

/// Every accepted field with its default (the full-scale system).
nlohmann::json default_document();

/// Sorted list of accepted field names.
std::vector<std::string> field_names();

/// Overlays `overrides` onto `base`. Throws ConfigError on unknown fields or
/// values of the wrong JSON type.
nlohmann::json merge(const nlohmann::json& base, const nlohmann::json& overrides);

/// Overlays RISGEE_<FIELD> variables (upper-case field name). Values are parsed
/// as JSON, so numbers are written plainly. `getenv` is injectable for tests.
nlohmann::json apply_env(const nlohmann::json& doc,
                         const std::function<std::optional<std::string>(const std::string&)>&
                             getenv_fn);
nlohmann::json apply_env(const nlohmann::json& doc);

/// Reads a JSON file. Throws ConfigError with the path on I/O or parse errors.
nlohmann::json read_file(const std::string& path);

/// Converts a complete document to SI units and validates it. Throws ConfigError.
ScenarioConfig to_config(const nlohmann::json& doc);

}  // namespace risgee::config_io
