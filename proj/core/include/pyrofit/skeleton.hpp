#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pyrofit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
  friend constexpr Vec2 operator/(Vec2 a, double k) { return {a.x / k, a.y / k}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

inline constexpr std::size_t kCocoKeypoints = 17;

/// COCO-17 keypoint indices.
enum class Coco : std::uint8_t {
  Nose = 0,
  LeftEye,
  RightEye,
  LeftEar,
  RightEar,
  LeftShoulder,
  RightShoulder,
  LeftElbow,
  RightElbow,
  LeftWrist,
  RightWrist,
  LeftHip,
  RightHip,
  LeftKnee,
  RightKnee,
  LeftAnkle,
  RightAnkle,
};

/// One timestamped detection in image coordinates (y grows downward).
struct KeypointFrame {
  std::int64_t t_ms = 0;
  std::array<Keypoint, kCocoKeypoints> keypoints{};

  const Keypoint& operator[](Coco c) const { return keypoints[static_cast<std::size_t>(c)]; }
  Keypoint& operator[](Coco c) { return keypoints[static_cast<std::size_t>(c)]; }

  friend bool operator==(const KeypointFrame&, const KeypointFrame&) = default;
};

/// The scored skeleton. Encoding 0..12 is stable and used in wire formats.
enum class Joint13 : std::uint8_t {
  Head = 0,
  RShoulder,
  RElbow,
  RWrist,
  LShoulder,
  LElbow,
  LWrist,
  RHip,
  RKnee,
  RAnkle,
  LHip,
  LKnee,
  LAnkle,
};

inline constexpr std::size_t kJointCount = 13;

constexpr std::size_t index(Joint13 j) { return static_cast<std::size_t>(j); }

std::string_view joint_name(Joint13 j);
std::optional<Joint13> joint_from_name(std::string_view name);

/// The joint playing the same role on the other side of the body. Head maps to itself.
Joint13 mirrored(Joint13 j);

/// Pose in the canonical frame: y up, hip midpoint at the origin, one unit
/// equal to the shoulder-midpoint to hip-midpoint distance.
struct Pose13 {
  std::int64_t t_ms = 0;
  std::array<Vec2, kJointCount> joints{};
  std::array<bool, kJointCount> valid{};
  /// Torso length in input units.
  double scale = 1.0;

  Vec2 operator[](Joint13 j) const { return joints[index(j)]; }
  bool is_valid(Joint13 j) const { return valid[index(j)]; }
};

inline constexpr std::size_t kLimbCount = 12;
inline constexpr std::size_t kAnglePairCount = 12;

struct LimbGraph {
  std::array<std::pair<Joint13, Joint13>, kLimbCount> limbs{};
  std::array<std::pair<std::size_t, std::size_t>, kAnglePairCount> angle_pairs{};
};

/// Neck, arms, torso sides and legs; see README for the angle-pair table.
const LimbGraph& default_limb_graph();

/// Throws ConfigError unless every joint is covered and every pair index is in range.
void validate(const LimbGraph& graph);

struct ReduceOptions {
  double min_confidence = 0.3;
  double image_height = 0.0;
  /// Undo a mirrored camera: negates canonical x and swaps left/right labels.
  bool mirror = false;
};

/// COCO-17 to the 13-joint canonical pose. Throws DegenerateSkeleton when no
/// shoulder or no hip is observed, or when the torso has zero length.
Pose13 reduce_to_pose13(const KeypointFrame& frame, const ReduceOptions& opts = {});

/// Canonical up-positive height. Throws InvalidJoint when masked.
double joint_height(const Pose13& pose, Joint13 joint);

/// Mean height of the valid members of a left/right pair. Throws InvalidJoint when both are masked.
double pair_mean_height(const Pose13& pose, Joint13 left, Joint13 right);

}  // namespace pyrofit
