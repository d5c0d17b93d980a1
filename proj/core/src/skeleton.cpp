#include "pyrofit/skeleton.hpp"

#include <algorithm>
#include <string>

#include "pyrofit/errors.hpp"

namespace pyrofit {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "head",  "r_shoulder", "r_elbow", "r_wrist", "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee",     "r_ankle", "l_hip",   "l_knee",     "l_ankle",
};

// Joint13 -> COCO source index.
constexpr std::array<Coco, kJointCount> kCocoSource = {
    Coco::Nose,     Coco::RightShoulder, Coco::RightElbow, Coco::RightWrist, Coco::LeftShoulder,
    Coco::LeftElbow, Coco::LeftWrist,    Coco::RightHip,   Coco::RightKnee,  Coco::RightAnkle,
    Coco::LeftHip,  Coco::LeftKnee,      Coco::LeftAnkle,
};

LimbGraph make_default_graph() {
  using J = Joint13;
  LimbGraph g;
  g.limbs = {{
      {J::Head, J::RShoulder},
      {J::Head, J::LShoulder},
      {J::RShoulder, J::RElbow},
      {J::RElbow, J::RWrist},
      {J::LShoulder, J::LElbow},
      {J::LElbow, J::LWrist},
      {J::RShoulder, J::RHip},
      {J::LShoulder, J::LHip},
      {J::RHip, J::RKnee},
      {J::RKnee, J::RAnkle},
      {J::LHip, J::LKnee},
      {J::LKnee, J::LAnkle},
  }};
  g.angle_pairs = {{
      {0, 2},   // neck / right upper arm
      {1, 4},   // neck / left upper arm
      {2, 3},   // right elbow
      {4, 5},   // left elbow
      {6, 2},   // right shoulder
      {7, 4},   // left shoulder
      {6, 8},   // right hip
      {7, 10},  // left hip
      {8, 9},   // right knee
      {10, 11}, // left knee
      {0, 6},   // right neck-torso
      {1, 7},   // left neck-torso
  }};
  return g;
}

}  // namespace

std::string_view joint_name(Joint13 j) { return kJointNames[index(j)]; }

std::optional<Joint13> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<Joint13>(i);
  }
  return std::nullopt;
}

Joint13 mirrored(Joint13 j) {
  using J = Joint13;
  switch (j) {
    case J::Head: return J::Head;
    case J::RShoulder: return J::LShoulder;
    case J::RElbow: return J::LElbow;
    case J::RWrist: return J::LWrist;
    case J::LShoulder: return J::RShoulder;
    case J::LElbow: return J::RElbow;
    case J::LWrist: return J::RWrist;
    case J::RHip: return J::LHip;
    case J::RKnee: return J::LKnee;
    case J::RAnkle: return J::LAnkle;
    case J::LHip: return J::RHip;
    case J::LKnee: return J::RKnee;
    case J::LAnkle: return J::RAnkle;
  }
  return j;
}

const LimbGraph& default_limb_graph() {
  static const LimbGraph graph = make_default_graph();
  return graph;
}

void validate(const LimbGraph& graph) {
  std::array<bool, kJointCount> covered{};
  for (const auto& [a, b] : graph.limbs) {
    if (index(a) >= kJointCount || index(b) >= kJointCount) {
      throw ConfigError("limb graph: joint out of range");
    }
    if (a == b) throw ConfigError("limb graph: limb joins a joint to itself");
    covered[index(a)] = covered[index(b)] = true;
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (!covered[j]) {
      throw ConfigError("limb graph: joint '" + std::string(kJointNames[j]) + "' not covered by any limb");
    }
  }
  for (const auto& [i, k] : graph.angle_pairs) {
    if (i >= kLimbCount || k >= kLimbCount) throw ConfigError("limb graph: angle pair references a missing limb");
  }
}

Pose13 reduce_to_pose13(const KeypointFrame& frame, const ReduceOptions& opts) {
  const auto usable = [&](Coco c) { return frame[c].confidence >= opts.min_confidence; };
  // Image y grows downward; flip so larger y is physically higher.
  const auto up = [&](Coco c) { return Vec2{frame[c].x, opts.image_height - frame[c].y}; };

  const auto midpoint = [&](Coco a, Coco b) -> std::optional<Vec2> {
    const bool va = usable(a);
    const bool vb = usable(b);
    if (va && vb) return (up(a) + up(b)) * 0.5;
    if (va) return up(a);
    if (vb) return up(b);
    return std::nullopt;
  };

  const auto shoulder_mid = midpoint(Coco::LeftShoulder, Coco::RightShoulder);
  const auto hip_mid = midpoint(Coco::LeftHip, Coco::RightHip);
  if (!shoulder_mid || !hip_mid) {
    throw DegenerateSkeleton("no observable shoulder or hip at t_ms=" + std::to_string(frame.t_ms));
  }
  const double scale = norm(*shoulder_mid - *hip_mid);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DegenerateSkeleton("zero torso length at t_ms=" + std::to_string(frame.t_ms));
  }

  Pose13 pose;
  pose.t_ms = frame.t_ms;
  pose.scale = scale;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const Coco src = kCocoSource[j];
    Vec2 p = (up(src) - *hip_mid) / scale;
    std::size_t dst = j;
    if (opts.mirror) {
      p.x = -p.x;
      dst = index(mirrored(static_cast<Joint13>(j)));
    }
    pose.joints[dst] = p;
    pose.valid[dst] = usable(src);
  }
  return pose;
}

double joint_height(const Pose13& pose, Joint13 joint) {
  if (!pose.is_valid(joint)) {
    throw InvalidJoint("joint '" + std::string(joint_name(joint)) + "' is masked");
  }
  return pose[joint].y;
}

double pair_mean_height(const Pose13& pose, Joint13 left, Joint13 right) {
  const bool vl = pose.is_valid(left);
  const bool vr = pose.is_valid(right);
  if (vl && vr) return (pose[left].y + pose[right].y) * 0.5;
  if (vl) return pose[left].y;
  if (vr) return pose[right].y;
  throw InvalidJoint("joints '" + std::string(joint_name(left)) + "' and '" + std::string(joint_name(right)) +
                     "' are both masked");
}

}  // namespace pyrofit
