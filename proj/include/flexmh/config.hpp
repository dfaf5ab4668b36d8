#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "flexmh/environment.hpp"

namespace flexmh {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict-schema parse of the instance description; unknown fields and
// malformed values raise ConfigError with the offending field path.
InstanceConfig parse_instance_config(const std::string& json_text);

// Canonical serialization: fixed key order, defaults filled in, floats at 12
// significant digits. parse followed by serialize is idempotent byte-for-byte.
std::string canonical_config_json(const InstanceConfig& config);

nlohmann::ordered_json config_to_json(const InstanceConfig& config);

// Deterministic JSON dump used for every report: stable key order (insertion
// order of ordered_json) and %.12g float formatting.
std::string dump_canonical(const nlohmann::ordered_json& j, int indent = 2);

}  // namespace flexmh
