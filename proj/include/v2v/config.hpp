#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "v2v/engine.hpp"

namespace v2v {

/// Every configurable key with its default value. Angles are in degrees.
nlohmann::json default_config();

/// Overlays `patch` onto `base`. Keys missing from `base` and type mismatches
/// raise ConfigError naming the dotted key.
void merge_config(nlohmann::json& base, const nlohmann::json& patch, const std::string& prefix = "");

/// Defaults overlaid with the file contents.
nlohmann::json load_config(const std::filesystem::path& path);

/// Applies `dotted.key=value`. The value is read as JSON when it parses,
/// otherwise as a string.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

SimConfig to_sim_config(const nlohmann::json& cfg);

/// FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& cfg);

struct ValidationCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Static checks on a resolved config.
std::vector<ValidationCheck> validation_report(const nlohmann::json& cfg);

}  // namespace v2v
