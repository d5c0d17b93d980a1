#include "pyrofit/config.hpp"

#include <fstream>
#include <functional>
#include <string>

#include "pyrofit/errors.hpp"

namespace pyrofit {

using nlohmann::json;

namespace {

struct Field {
  std::string_view key;
  std::function<void(EngineConfig&, const json&)> set;
  std::function<json(const EngineConfig&)> get;
};

template <typename T>
T read_value(std::string_view key, const json& v) {
  const auto fail = [&](const char* want) {
    return ConfigError("config key '" + std::string(key) + "' expects " + want);
  };
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw fail("a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw fail("an integer");
    return v.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw fail("a number");
    return v.get<T>();
  } else {
    // std::array<double, N>
    if (!v.is_array() || v.size() != std::tuple_size_v<T>) throw fail("an array of numbers");
    T out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!v[i].is_number()) throw fail("an array of numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }
}

template <typename Sub, typename T>
Field field_of(std::string_view key, Sub EngineConfig::*sub, T Sub::*member) {
  return Field{key, [=](EngineConfig& c, const json& v) { (c.*sub).*member = read_value<T>(key, v); },
               [=](const EngineConfig& c) { return json((c.*sub).*member); }};
}

const std::vector<Field>& fields() {
  using E = EngineConfig;
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        field_of("min_confidence", &E::reduce, &ReduceOptions::min_confidence),
        field_of("image_height", &E::reduce, &ReduceOptions::image_height),
        field_of("mirror", &E::reduce, &ReduceOptions::mirror),

        field_of("d_std", &E::scoring, &ScoringConfig::d_std),
        field_of("s_std", &E::scoring, &ScoringConfig::s_std),
        field_of("delay_window_s", &E::scoring, &ScoringConfig::delay_window_s),
        field_of("min_valid_angles", &E::scoring, &ScoringConfig::min_valid_angles),

        field_of("activity_threshold_ratio", &E::choreo, &ChoreoConfig::activity_threshold_ratio),
        field_of("amplitude_medium_ratio", &E::choreo, &ChoreoConfig::amplitude_medium_ratio),
        field_of("amplitude_window_ms", &E::choreo, &ChoreoConfig::amplitude_window_ms),
        field_of("max_fireworks_per_frame", &E::choreo, &ChoreoConfig::max_fireworks_per_frame),
        field_of("reference_fps", &E::choreo, &ChoreoConfig::reference_fps),
        field_of("stage_center_x", &E::choreo, &ChoreoConfig::stage_center_x),
        field_of("stage_units_per_torso", &E::choreo, &ChoreoConfig::stage_units_per_torso),
        field_of("stage_ground_offset", &E::choreo, &ChoreoConfig::stage_ground_offset),
        field_of("stage_min_height", &E::choreo, &ChoreoConfig::stage_min_height),

        field_of("dt_s", &E::scene, &SceneConfig::dt_s),
        field_of("gravity", &E::scene, &SceneConfig::gravity),
        field_of("drag", &E::scene, &SceneConfig::drag),
        field_of("width", &E::scene, &SceneConfig::width),
        field_of("height", &E::scene, &SceneConfig::height),
        field_of("base_speed", &E::scene, &SceneConfig::base_speed),
        field_of("ball_count", &E::scene, &SceneConfig::ball_count),
        field_of("star_count", &E::scene, &SceneConfig::star_count),
        field_of("star_spokes", &E::scene, &SceneConfig::star_spokes),
        field_of("star_rings", &E::scene, &SceneConfig::star_rings),
        field_of("star_jitter_deg", &E::scene, &SceneConfig::star_jitter_deg),
        field_of("cluster_core_count", &E::scene, &SceneConfig::cluster_core_count),
        field_of("cluster_bursts", &E::scene, &SceneConfig::cluster_bursts),
        field_of("cluster_burst_count", &E::scene, &SceneConfig::cluster_burst_count),
        field_of("size_multipliers", &E::scene, &SceneConfig::size_multipliers),
        field_of("ball_lifetime_s", &E::scene, &SceneConfig::ball_lifetime_s),
        field_of("star_lifetime_s", &E::scene, &SceneConfig::star_lifetime_s),
        field_of("cluster_lifetime_s", &E::scene, &SceneConfig::cluster_lifetime_s),
        field_of("particle_radius", &E::scene, &SceneConfig::particle_radius),
        field_of("rocket_radius", &E::scene, &SceneConfig::rocket_radius),
        field_of("spawn_at_joint", &E::scene, &SceneConfig::spawn_at_joint),

        field_of("reminder_debounce_ms", &E::session, &SessionConfig::reminder_debounce_ms),
    };
    f.push_back(Field{"limb_graph", [](EngineConfig& c, const json& v) { c.limb_graph = limb_graph_from_json(v); },
                      [](const EngineConfig& c) { return to_json(c.limb_graph); }});
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void EngineConfig::validate() const {
  if (!(reduce.min_confidence >= 0.0 && reduce.min_confidence <= 1.0)) {
    throw ConfigError("min_confidence must be in [0, 1]");
  }
  scoring.validate();
  choreo.validate();
  scene.validate();
  if (session.reminder_debounce_ms < 0) throw ConfigError("reminder_debounce_ms must be >= 0");
  pyrofit::validate(limb_graph);
}

void apply_json(EngineConfig& cfg, const json& obj) {
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : obj.items()) find_field(key).set(cfg, value);
}

void apply_override(EngineConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string_view text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = std::string(text);
  find_field(key).set(cfg, value);
}

json to_json(const EngineConfig& cfg) {
  json out = json::object();
  for (const Field& f : fields()) out[std::string(f.key)] = f.get(cfg);
  return out;
}

EngineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
  EngineConfig cfg;
  apply_json(cfg, j);
  cfg.validate();
  return cfg;
}

LimbGraph limb_graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("limbs") || !j.contains("angle_pairs")) {
    throw ConfigError("limb_graph needs 'limbs' and 'angle_pairs'");
  }
  const json& limbs = j["limbs"];
  const json& pairs = j["angle_pairs"];
  if (!limbs.is_array() || limbs.size() != kLimbCount) throw ConfigError("limb_graph.limbs must list 12 limbs");
  if (!pairs.is_array() || pairs.size() != kAnglePairCount) {
    throw ConfigError("limb_graph.angle_pairs must list 12 pairs");
  }
  LimbGraph g;
  for (std::size_t i = 0; i < kLimbCount; ++i) {
    const json& l = limbs[i];
    if (!l.is_array() || l.size() != 2 || !l[0].is_string() || !l[1].is_string()) {
      throw ConfigError("limb_graph.limbs entries are [joint, joint] names");
    }
    const auto a = joint_from_name(l[0].get<std::string>());
    const auto b = joint_from_name(l[1].get<std::string>());
    if (!a || !b) throw ConfigError("limb_graph: unknown joint name in limb " + std::to_string(i));
    g.limbs[i] = {*a, *b};
  }
  for (std::size_t k = 0; k < kAnglePairCount; ++k) {
    const json& p = pairs[k];
    const auto is_index = [](const json& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; };
    if (!p.is_array() || p.size() != 2 || !is_index(p[0]) || !is_index(p[1])) {
      throw ConfigError("limb_graph.angle_pairs entries are [limb, limb] indices");
    }
    g.angle_pairs[k] = {p[0].get<std::size_t>(), p[1].get<std::size_t>()};
  }
  validate(g);
  return g;
}

json to_json(const LimbGraph& graph) {
  json limbs = json::array();
  for (const auto& [a, b] : graph.limbs) limbs.push_back({joint_name(a), joint_name(b)});
  json pairs = json::array();
  for (const auto& [i, k] : graph.angle_pairs) pairs.push_back({i, k});
  return json{{"limbs", std::move(limbs)}, {"angle_pairs", std::move(pairs)}};
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace pyrofit
