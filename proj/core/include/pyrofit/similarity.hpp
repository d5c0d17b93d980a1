#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pyrofit/skeleton.hpp"

namespace pyrofit {

struct LimbVectors {
  std::array<Vec2, kLimbCount> v{};
  std::array<bool, kLimbCount> valid{};
};

struct JointAngles {
  /// arccos of the limb-pair cosine, degrees in [0, 180].
  std::array<double, kAnglePairCount> angles_deg{};
  std::array<bool, kAnglePairCount> valid{};
};

struct AngleDiffs {
  std::array<double, kAnglePairCount> delta_deg{};
  double delta_sum = 0.0;
  std::array<bool, kAnglePairCount> valid{};

  std::size_t valid_count() const;
};

struct Weights {
  std::array<double, kAnglePairCount> w{};
};

struct ScoringConfig {
  double d_std = 65.0;
  double s_std = 60.0;
  double delay_window_s = 3.0;
  int min_valid_angles = 6;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct SimilarityResult {
  double D = 0.0;
  double S = 0.0;
  AngleDiffs per_joint;
  Weights weights;
  std::int64_t matched_demo_t_ms = 0;
};

struct ReminderEvent {
  std::int64_t t_ms = 0;
  double D = 0.0;
  /// Angle-pair indices with the largest weighted deviation, largest first.
  std::array<std::size_t, 3> worst{};
};

/// Teacher reference: normalized poses in time order plus the recorded rate.
struct DemoTrack {
  std::string name;
  double fps = 30.0;
  std::vector<Pose13> frames;
};

LimbVectors limb_vectors(const Pose13& pose, const LimbGraph& graph = default_limb_graph());

JointAngles joint_angles(const LimbVectors& vectors, const LimbGraph& graph = default_limb_graph());

/// Convenience: joint_angles(limb_vectors(pose)).
JointAngles pose_angles(const Pose13& pose, const LimbGraph& graph = default_limb_graph());

/// Absolute per-pair differences. Throws InsufficientData below `min_valid_angles`.
AngleDiffs angle_diffs(const JointAngles& demo, const JointAngles& user, int min_valid_angles = 6);

/// Movement-sensitive weights (1 - e^{-d_i/sum}) normalized over valid pairs.
/// Uniform over valid pairs when every difference is zero.
Weights weights(const AngleDiffs& diffs);

double weighted_distance(const AngleDiffs& diffs, const Weights& w);

/// Piecewise-linear score: 100 at D = 0, s_std at D = d_std, 0 beyond.
double score(double D, const ScoringConfig& cfg = {});

/// Full pipeline against one demo pose with precomputed angles.
SimilarityResult compare(const JointAngles& demo, const JointAngles& user, const ScoringConfig& cfg);

/// Scores `user` against every demo frame in [t - window, t] and keeps the
/// best (highest S, then lowest D, then the most recent frame).
/// Throws EmptyWindow if no demo frame falls in the window, and
/// InsufficientData if no frame in the window can be compared.
SimilarityResult align_and_score(const Pose13& user, const DemoTrack& demo, const ScoringConfig& cfg = {},
                                 const LimbGraph& graph = default_limb_graph());

/// A reminder is raised exactly when the score is zero.
std::optional<ReminderEvent> reminder(const SimilarityResult& result, std::int64_t t_ms);

}  // namespace pyrofit
