#pragma once

#include <iosfwd>
#include <string>

#include "dirsim/channel.hpp"

namespace dirsim {

/// Parses a JSON scenario description; every key is optional and defaults to
/// the built-in scenario. Unknown keys are rejected. Throws ConfigError.
SystemConfig parse_config(std::istream& is);
SystemConfig load_config(const std::string& path);

std::string config_to_json(const SystemConfig& cfg);

NmseMode parse_nmse_mode(const std::string& name);  // "literal" | "per-matrix"

}  // namespace dirsim
