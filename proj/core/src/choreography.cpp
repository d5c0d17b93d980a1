#include "pyrofit/choreography.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "pyrofit/errors.hpp"

namespace pyrofit {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 3> kShapeNames = {"star", "ball", "cluster"};
constexpr std::array<std::string_view, 7> kColorNames = {"white", "purple", "blue", "green",
                                                         "orange", "yellow", "multi"};
constexpr std::array<std::string_view, 4> kSizeNames = {"large", "medium", "small", "tiny"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

double number_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw MalformedRecord(0, std::string("missing number '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw MalformedRecord(0, std::string("'") + key + "' is not finite");
  return v;
}

std::string string_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw MalformedRecord(0, std::string("missing string '") + key + "'");
  return it->get<std::string>();
}

/// Mean height of a pair, or empty when both are masked.
std::optional<double> mean_height(const Pose13& pose, Joint13 l, Joint13 r) {
  if (!pose.is_valid(l) && !pose.is_valid(r)) return std::nullopt;
  return pair_mean_height(pose, l, r);
}

}  // namespace

std::string_view to_string(Shape s) { return kShapeNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Color c) { return kColorNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Size s) { return kSizeNames[static_cast<std::size_t>(s)]; }
std::optional<Shape> shape_from_string(std::string_view s) { return lookup<Shape>(kShapeNames, s); }
std::optional<Color> color_from_string(std::string_view s) { return lookup<Color>(kColorNames, s); }
std::optional<Size> size_from_string(std::string_view s) { return lookup<Size>(kSizeNames, s); }

json to_json(const FireworkSpec& spec) {
  return json{{"t_ms", spec.spawn_t_ms},
              {"x", spec.origin.x},
              {"y", spec.origin.y},
              {"angle_deg", spec.launch_angle_deg},
              {"shape", to_string(spec.shape)},
              {"color", to_string(spec.color)},
              {"size", to_string(spec.size)},
              {"seed", std::to_string(spec.seed)}};
}

FireworkSpec firework_from_json(const json& j) {
  if (!j.is_object()) throw MalformedRecord(0, "firework is not an object");
  FireworkSpec spec;
  const auto t = j.find("t_ms");
  if (t == j.end() || !t->is_number_integer()) throw MalformedRecord(0, "missing integer 't_ms'");
  spec.spawn_t_ms = t->get<std::int64_t>();
  spec.origin = {number_field(j, "x"), number_field(j, "y")};
  spec.launch_angle_deg = number_field(j, "angle_deg");
  if (!(spec.launch_angle_deg > 0.0 && spec.launch_angle_deg < 180.0)) {
    throw MalformedRecord(0, "'angle_deg' outside (0, 180)");
  }
  const auto shape = shape_from_string(string_field(j, "shape"));
  const auto color = color_from_string(string_field(j, "color"));
  const auto size = size_from_string(string_field(j, "size"));
  if (!shape) throw MalformedRecord(0, "unknown shape");
  if (!color) throw MalformedRecord(0, "unknown color");
  if (!size) throw MalformedRecord(0, "unknown size");
  spec.shape = *shape;
  spec.color = *color;
  spec.size = *size;

  const std::string seed = string_field(j, "seed");
  const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), spec.seed);
  if (ec != std::errc{} || ptr != seed.data() + seed.size()) throw MalformedRecord(0, "'seed' is not a u64");
  return spec;
}

void ChoreoConfig::validate() const {
  if (!(activity_threshold_ratio > 0.0)) throw ConfigError("activity_threshold_ratio must be > 0");
  if (!(amplitude_medium_ratio > 0.0)) throw ConfigError("amplitude_medium_ratio must be > 0");
  if (amplitude_window_ms <= 0) throw ConfigError("amplitude_window_ms must be > 0");
  if (max_fireworks_per_frame <= 0) throw ConfigError("max_fireworks_per_frame must be > 0");
  if (!(reference_fps > 0.0)) throw ConfigError("reference_fps must be > 0");
  if (!(stage_units_per_torso > 0.0)) throw ConfigError("stage_units_per_torso must be > 0");
}

std::vector<ActiveJoint> active_joints(const Pose13& curr, const Pose13& prev, const ChoreoConfig& cfg) {
  const double interval_ms = static_cast<double>(curr.t_ms - prev.t_ms);
  const double threshold = cfg.activity_threshold_ratio * interval_ms * cfg.reference_fps / 1000.0;
  std::vector<ActiveJoint> out;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (!curr.valid[j] || !prev.valid[j]) continue;
    const double d = norm(curr.joints[j] - prev.joints[j]);
    if (d > threshold) out.push_back({static_cast<Joint13>(j), curr.joints[j], d});
  }
  return out;
}

Amplitudes amplitudes(const Pose13& curr, std::span<const Pose13> history, const ChoreoConfig& cfg) {
  Amplitudes out;
  const std::int64_t since = curr.t_ms - cfg.amplitude_window_ms;
  for (const Pose13& past : history) {
    if (past.t_ms < since || past.t_ms >= curr.t_ms) continue;
    for (std::size_t j = 0; j < kJointCount; ++j) {
      if (!curr.valid[j] || !past.valid[j]) continue;
      const double d = norm(curr.joints[j] - past.joints[j]);
      out[j] = std::max(out[j].value_or(0.0), d);
    }
  }
  return out;
}

double launch_angle(const Pose13& pose) {
  using J = Joint13;
  for (J j : {J::LShoulder, J::RShoulder, J::LHip, J::RHip}) {
    if (!pose.is_valid(j)) throw InvalidJoint("launch angle needs both shoulders and hips");
  }
  const Vec2 d = pose[J::LShoulder] + pose[J::RShoulder] - pose[J::LHip] - pose[J::RHip];
  const double lean_deg = std::atan2(d.x, d.y) * 180.0 / std::numbers::pi;
  return std::clamp(90.0 - lean_deg, 10.0, 170.0);
}

Shape shape_for(const Amplitudes& amps, const Pose13& pose, const ChoreoConfig& cfg) {
  using J = Joint13;
  const auto wrists = mean_height(pose, J::LWrist, J::RWrist);
  if (wrists && pose.is_valid(J::Head) && *wrists > pose[J::Head].y) return Shape::Cluster;

  double largest = 0.0;
  for (const auto& a : amps) largest = std::max(largest, a.value_or(0.0));
  return largest >= cfg.amplitude_medium_ratio ? Shape::Ball : Shape::Star;
}

Color color_for(const Pose13& pose) {
  using J = Joint13;
  const auto need = [](std::optional<double> v, const char* what) {
    if (!v) throw InvalidJoint(std::string("color ladder needs ") + what);
    return *v;
  };
  const double w = need(mean_height(pose, J::LWrist, J::RWrist), "wrists");
  const double head = joint_height(pose, J::Head);
  if (w > head) {
    // The head proxy is the nose, so the nose and head references coincide.
    const double elbows = need(mean_height(pose, J::LElbow, J::RElbow), "elbows");
    return elbows > head ? Color::Multi : Color::Yellow;
  }
  if (w > need(mean_height(pose, J::LShoulder, J::RShoulder), "shoulders")) return Color::Yellow;
  if (w > need(mean_height(pose, J::LElbow, J::RElbow), "elbows")) return Color::Orange;
  const double hips = need(mean_height(pose, J::LHip, J::RHip), "hips");
  if (w > hips) return Color::Green;
  const double knees = need(mean_height(pose, J::LKnee, J::RKnee), "knees");
  if (w > (knees + hips) * 0.5) return Color::Blue;
  if (w > knees) return Color::Purple;
  return Color::White;
}

Size size_for(const Pose13& pose) {
  using J = Joint13;
  struct Row {
    J left, right;
    Size size;
  };
  constexpr std::array<Row, 4> rows = {{
      {J::LWrist, J::RWrist, Size::Large},
      {J::LAnkle, J::RAnkle, Size::Medium},
      {J::LElbow, J::RElbow, Size::Small},
      {J::LShoulder, J::RShoulder, Size::Tiny},
  }};
  std::optional<Size> best;
  double widest = 0.0;
  for (const Row& row : rows) {
    if (!pose.is_valid(row.left) || !pose.is_valid(row.right)) continue;
    const double span = std::abs(pose[row.left].x - pose[row.right].x);
    if (!best || span > widest) {
      best = row.size;
      widest = span;
    }
  }
  if (!best) throw InvalidJoint("size needs at least one complete left/right pair");
  return *best;
}

Vec2 to_scene(Vec2 canonical, const ChoreoConfig& cfg) {
  return {cfg.stage_center_x + canonical.x * cfg.stage_units_per_torso,
          std::max(cfg.stage_min_height, (canonical.y + cfg.stage_ground_offset) * cfg.stage_units_per_torso)};
}

std::vector<FireworkSpec> choreograph(const Pose13& curr, const Pose13& prev, std::span<const Pose13> history,
                                      double score, const ChoreoConfig& cfg, SplitMix64& seeds) {
  if (!(score > 0.0)) return {};
  std::vector<ActiveJoint> active = active_joints(curr, prev, cfg);
  if (active.empty()) return {};

  std::stable_sort(active.begin(), active.end(),
                   [](const ActiveJoint& a, const ActiveJoint& b) { return a.displacement > b.displacement; });
  if (active.size() > static_cast<std::size_t>(cfg.max_fireworks_per_frame)) {
    active.resize(static_cast<std::size_t>(cfg.max_fireworks_per_frame));
  }

  const Amplitudes all_amps = amplitudes(curr, history, cfg);
  Amplitudes active_amps;
  for (const ActiveJoint& a : active) active_amps[index(a.joint)] = all_amps[index(a.joint)];

  // Masked reference joints fall back to neutral parameters.
  double angle = 90.0;
  Color color = Color::White;
  Size size = Size::Tiny;
  try {
    angle = launch_angle(curr);
  } catch (const InvalidJoint&) {
  }
  try {
    color = color_for(curr);
  } catch (const InvalidJoint&) {
  }
  try {
    size = size_for(curr);
  } catch (const InvalidJoint&) {
  }
  const Shape shape = shape_for(active_amps, curr, cfg);

  std::vector<FireworkSpec> out;
  out.reserve(active.size());
  for (const ActiveJoint& a : active) {
    FireworkSpec spec;
    spec.origin = to_scene(a.position, cfg);
    spec.launch_angle_deg = angle;
    spec.shape = shape;
    spec.color = color;
    spec.size = size;
    spec.seed = seeds.next();
    spec.spawn_t_ms = curr.t_ms;
    out.push_back(spec);
  }
  return out;
}

}  // namespace pyrofit
