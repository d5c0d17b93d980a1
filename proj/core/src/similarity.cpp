#include "pyrofit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pyrofit/errors.hpp"

namespace pyrofit {

namespace {

constexpr double kMinNorm = 1e-9;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

std::size_t AngleDiffs::valid_count() const { return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true)); }

void ScoringConfig::validate() const {
  if (!(d_std > 0.0)) throw ConfigError("d_std must be > 0");
  if (!(s_std >= 0.0 && s_std < 100.0)) throw ConfigError("s_std must be in [0, 100)");
  if (!(delay_window_s >= 0.0)) throw ConfigError("delay_window_s must be >= 0");
  if (min_valid_angles < 1 || min_valid_angles > static_cast<int>(kAnglePairCount)) {
    throw ConfigError("min_valid_angles must be in [1, 12]");
  }
}

LimbVectors limb_vectors(const Pose13& pose, const LimbGraph& graph) {
  LimbVectors out;
  for (std::size_t i = 0; i < kLimbCount; ++i) {
    const auto [a, b] = graph.limbs[i];
    out.valid[i] = pose.is_valid(a) && pose.is_valid(b);
    out.v[i] = out.valid[i] ? pose[a] - pose[b] : Vec2{};
  }
  return out;
}

JointAngles joint_angles(const LimbVectors& vectors, const LimbGraph& graph) {
  JointAngles out;
  for (std::size_t k = 0; k < kAnglePairCount; ++k) {
    const auto [i, j] = graph.angle_pairs[k];
    if (!vectors.valid[i] || !vectors.valid[j]) continue;
    const Vec2 a = vectors.v[i];
    const Vec2 b = vectors.v[j];
    const double na = norm(a);
    const double nb = norm(b);
    if (na < kMinNorm || nb < kMinNorm) continue;
    // arccos of the cosine, in atan2 form.
    out.angles_deg[k] = std::atan2(std::abs(a.x * b.y - a.y * b.x), dot(a, b)) * kRadToDeg;
    out.valid[k] = true;
  }
  return out;
}

JointAngles pose_angles(const Pose13& pose, const LimbGraph& graph) { return joint_angles(limb_vectors(pose, graph), graph); }

AngleDiffs angle_diffs(const JointAngles& demo, const JointAngles& user, int min_valid_angles) {
  AngleDiffs out;
  int n = 0;
  for (std::size_t k = 0; k < kAnglePairCount; ++k) {
    if (!demo.valid[k] || !user.valid[k]) continue;
    out.valid[k] = true;
    out.delta_deg[k] = std::abs(demo.angles_deg[k] - user.angles_deg[k]);
    out.delta_sum += out.delta_deg[k];
    ++n;
  }
  if (n < min_valid_angles) {
    throw InsufficientData("only " + std::to_string(n) + " comparable angle pairs (need " +
                           std::to_string(min_valid_angles) + ")");
  }
  return out;
}

Weights weights(const AngleDiffs& diffs) {
  Weights out;
  const std::size_t n = diffs.valid_count();
  if (n == 0) return out;
  if (diffs.delta_sum <= 0.0) {
    for (std::size_t k = 0; k < kAnglePairCount; ++k) {
      if (diffs.valid[k]) out.w[k] = 1.0 / static_cast<double>(n);
    }
    return out;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < kAnglePairCount; ++k) {
    if (!diffs.valid[k]) continue;
    out.w[k] = -std::expm1(-diffs.delta_deg[k] / diffs.delta_sum);
    total += out.w[k];
  }
  for (double& w : out.w) w /= total;
  return out;
}

double weighted_distance(const AngleDiffs& diffs, const Weights& w) {
  double d = 0.0;
  for (std::size_t k = 0; k < kAnglePairCount; ++k) {
    if (diffs.valid[k]) d += diffs.delta_deg[k] * w.w[k];
  }
  return d;
}

double score(double D, const ScoringConfig& cfg) {
  if (D > cfg.d_std) return 0.0;
  return (cfg.d_std - D) * (100.0 - cfg.s_std) / cfg.d_std + cfg.s_std;
}

SimilarityResult compare(const JointAngles& demo, const JointAngles& user, const ScoringConfig& cfg) {
  SimilarityResult r;
  r.per_joint = angle_diffs(demo, user, cfg.min_valid_angles);
  r.weights = weights(r.per_joint);
  r.D = weighted_distance(r.per_joint, r.weights);
  r.S = score(r.D, cfg);
  return r;
}

SimilarityResult align_and_score(const Pose13& user, const DemoTrack& demo, const ScoringConfig& cfg,
                                 const LimbGraph& graph) {
  const auto window_ms = static_cast<std::int64_t>(std::llround(cfg.delay_window_s * 1000.0));
  const std::int64_t lo_t = user.t_ms - window_ms;
  const auto by_time = [](const Pose13& p, std::int64_t t) { return p.t_ms < t; };
  const auto first = std::lower_bound(demo.frames.begin(), demo.frames.end(), lo_t, by_time);
  const auto last = std::upper_bound(demo.frames.begin(), demo.frames.end(), user.t_ms,
                                     [](std::int64_t t, const Pose13& p) { return t < p.t_ms; });
  if (first >= last) {
    throw EmptyWindow("no demo frame in [" + std::to_string(lo_t) + ", " + std::to_string(user.t_ms) + "]");
  }

  const JointAngles user_angles = pose_angles(user, graph);
  std::optional<SimilarityResult> best;
  std::optional<InsufficientData> last_error;
  for (auto it = first; it != last; ++it) {
    SimilarityResult r;
    try {
      r = compare(pose_angles(*it, graph), user_angles, cfg);
    } catch (const InsufficientData& e) {
      last_error = e;
      continue;
    }
    r.matched_demo_t_ms = it->t_ms;
    // Iteration is in time order, so ">=" on full ties keeps the most recent frame.
    if (!best || r.S > best->S || (r.S == best->S && r.D <= best->D)) best = r;
  }
  if (!best) throw *last_error;
  return *best;
}

std::optional<ReminderEvent> reminder(const SimilarityResult& result, std::int64_t t_ms) {
  if (result.S != 0.0) return std::nullopt;
  std::array<std::size_t, kAnglePairCount> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto contribution = [&](std::size_t k) {
    return result.per_joint.valid[k] ? result.per_joint.delta_deg[k] * result.weights.w[k] : -1.0;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return contribution(a) > contribution(b); });
  ReminderEvent ev;
  ev.t_ms = t_ms;
  ev.D = result.D;
  std::copy_n(order.begin(), ev.worst.size(), ev.worst.begin());
  return ev;
}

}  // namespace pyrofit
