#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pyrofit/choreography.hpp"
#include "pyrofit/pyro.hpp"
#include "pyrofit/similarity.hpp"
#include "pyrofit/skeleton.hpp"

namespace pyrofit {

struct SessionConfig {
  std::int64_t reminder_debounce_ms = 1000;
};

/// Everything a session needs. Every field is addressable by a flat
/// snake_case key (the field's own name) in config files and overrides.
struct EngineConfig {
  ReduceOptions reduce;
  ScoringConfig scoring;
  ChoreoConfig choreo;
  SceneConfig scene;
  SessionConfig session;
  LimbGraph limb_graph = default_limb_graph();

  void validate() const;
};

/// Applies the members of a JSON object. Throws ConfigError naming the
/// offending key when it is unknown or has the wrong type. Does not validate.
void apply_json(EngineConfig& cfg, const nlohmann::json& obj);

/// `key=value`; value is read as JSON, falling back to a bare string.
void apply_override(EngineConfig& cfg, std::string_view assignment);

nlohmann::json to_json(const EngineConfig& cfg);

/// Defaults, then the file, then validation.
EngineConfig load_config_file(const std::filesystem::path& path);

/// `{"limbs": [["head", "r_shoulder"], ...], "angle_pairs": [[0, 2], ...]}`,
/// limb indices 0-based.
LimbGraph limb_graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LimbGraph& graph);

std::vector<std::string_view> config_keys();

}  // namespace pyrofit
