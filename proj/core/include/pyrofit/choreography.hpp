#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pyrofit/rng.hpp"
#include "pyrofit/skeleton.hpp"

namespace pyrofit {

enum class Shape : std::uint8_t { Star, Ball, Cluster };
enum class Color : std::uint8_t { White, Purple, Blue, Green, Orange, Yellow, Multi };
enum class Size : std::uint8_t { Large, Medium, Small, Tiny };

std::string_view to_string(Shape s);
std::string_view to_string(Color c);
std::string_view to_string(Size s);
std::optional<Shape> shape_from_string(std::string_view s);
std::optional<Color> color_from_string(std::string_view s);
std::optional<Size> size_from_string(std::string_view s);

struct FireworkSpec {
  Vec2 origin;  // scene units
  double launch_angle_deg = 90.0;
  Shape shape = Shape::Ball;
  Color color = Color::White;
  Size size = Size::Medium;
  std::uint64_t seed = 0;
  std::int64_t spawn_t_ms = 0;

  friend bool operator==(const FireworkSpec&, const FireworkSpec&) = default;
};

/// Wire form `{"t_ms","x","y","angle_deg","shape","color","size","seed"}`,
/// seed as a decimal string. Throws MalformedRecord on bad input.
nlohmann::json to_json(const FireworkSpec& spec);
FireworkSpec firework_from_json(const nlohmann::json& j);

struct ChoreoConfig {
  /// Per-frame displacement threshold in torso units at `reference_fps`,
  /// scaled linearly with the actual frame interval.
  double activity_threshold_ratio = 0.02;
  /// Small/medium amplitude boundary in torso units.
  double amplitude_medium_ratio = 0.15;
  std::int64_t amplitude_window_ms = 300;
  int max_fireworks_per_frame = 8;
  double reference_fps = 30.0;

  // Canonical pose -> scene mapping for firework origins.
  double stage_center_x = 10.0;
  double stage_units_per_torso = 2.0;
  double stage_ground_offset = 2.5;
  double stage_min_height = 1.0;

  void validate() const;
};

struct ActiveJoint {
  Joint13 joint = Joint13::Head;
  Vec2 position;
  double displacement = 0.0;
};

/// Joints whose displacement between `prev` and `curr` exceeds the activity
/// threshold, in joint order.
std::vector<ActiveJoint> active_joints(const Pose13& curr, const Pose13& prev, const ChoreoConfig& cfg = {});

/// Per-joint amplitude: the largest distance between the current position
/// and any position in `history` within the amplitude window. Empty when the
/// joint is masked now or never observed in the window.
using Amplitudes = std::array<std::optional<double>, kJointCount>;
Amplitudes amplitudes(const Pose13& curr, std::span<const Pose13> history, const ChoreoConfig& cfg = {});

/// Degrees, 90 for an upright torso, below 90 when leaning toward +x.
/// Clamped to [10, 170]. Throws InvalidJoint if a shoulder or hip is masked.
double launch_angle(const Pose13& pose);

/// Cluster when the wrists are above the head; otherwise Ball or Star by the
/// largest amplitude present in `amps`.
Shape shape_for(const Amplitudes& amps, const Pose13& pose, const ChoreoConfig& cfg = {});

/// Height ladder, first match wins:
///   wrists > head, elbows > nose      Multi
///   wrists > head                     Yellow
///   wrists > shoulders                Yellow
///   wrists > elbows                   Orange
///   wrists > hips                     Green
///   wrists > (knees + hips) / 2       Blue
///   wrists > knees                    Purple
///   otherwise                         White
/// References are read lazily; throws InvalidJoint only when a rung that
/// must be evaluated has no valid joints.
Color color_for(const Pose13& pose);

/// Widest horizontal left/right span among wrists, ankles, elbows and
/// shoulders (in that tie-break priority) selects Large/Medium/Small/Tiny.
Size size_for(const Pose13& pose);

Vec2 to_scene(Vec2 canonical, const ChoreoConfig& cfg);

/// One firework per active joint (largest displacements first, capped) when
/// `score` > 0; nothing otherwise. Seeds are drawn from `seeds` in output order.
std::vector<FireworkSpec> choreograph(const Pose13& curr, const Pose13& prev, std::span<const Pose13> history,
                                      double score, const ChoreoConfig& cfg, SplitMix64& seeds);

}  // namespace pyrofit
