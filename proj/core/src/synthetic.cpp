#include "pyrofit/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "pyrofit/rng.hpp"

namespace pyrofit {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec2 rotate(Vec2 v, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

}  // namespace

KeypointFrame synthetic_frame(std::int64_t t_ms, const RoutineParams& p) {
  const double t = static_cast<double>(t_ms) / 1000.0 + p.phase_s;
  const double phi = 2.0 * std::numbers::pi * t / p.period_s;

  const double arm = (p.arm_min_deg + (p.arm_max_deg - p.arm_min_deg) * 0.5 * (1.0 - std::cos(phi))) * kDeg;
  const double elbow = p.elbow_max_deg * 0.5 * (1.0 + std::sin(2.0 * phi)) * kDeg;
  const double knee = p.knee_max_deg * 0.5 * (1.0 - std::cos(2.0 * phi)) * kDeg;
  const double lean = p.lean_max_deg * std::sin(phi) * kDeg;

  const double unit = p.torso_px / 100.0;
  const double thigh = 90.0 * unit;
  const double ground = 20.0 * unit;

  // Body frame, y up. "Right" is the subject's right, on the image's left.
  const Vec2 hip{p.hip_x, ground + 2.0 * thigh * std::cos(knee / 2.0)};
  const Vec2 up{std::sin(lean), std::cos(lean)};
  const Vec2 side{std::cos(lean), -std::sin(lean)};  // toward the subject's left
  const Vec2 shoulder_mid = hip + up * p.torso_px;

  std::array<Vec2, kCocoKeypoints> kp{};
  const auto at = [&](Coco c) -> Vec2& { return kp[static_cast<std::size_t>(c)]; };

  at(Coco::Nose) = shoulder_mid + up * (45.0 * unit);
  at(Coco::LeftEye) = at(Coco::Nose) + up * (6.0 * unit) + side * (8.0 * unit);
  at(Coco::RightEye) = at(Coco::Nose) + up * (6.0 * unit) - side * (8.0 * unit);
  at(Coco::LeftEar) = at(Coco::Nose) + side * (16.0 * unit);
  at(Coco::RightEar) = at(Coco::Nose) - side * (16.0 * unit);

  for (const double s : {-1.0, 1.0}) {  // -1 right, +1 left
    const bool left = s > 0.0;
    const Vec2 shoulder = shoulder_mid + side * (s * 40.0 * unit);
    const Vec2 upper = rotate(up * -1.0, s * arm);
    const Vec2 elbow_pos = shoulder + upper * (60.0 * unit);
    const Vec2 wrist = elbow_pos + rotate(upper, s * elbow) * (55.0 * unit);

    const Vec2 hip_j = hip + side * (s * 25.0 * unit);
    const Vec2 knee_pos = hip_j + Vec2{s * std::sin(knee / 2.0), -std::cos(knee / 2.0)} * thigh;
    const Vec2 ankle = knee_pos + Vec2{-s * std::sin(knee / 2.0), -std::cos(knee / 2.0)} * thigh;

    at(left ? Coco::LeftShoulder : Coco::RightShoulder) = shoulder;
    at(left ? Coco::LeftElbow : Coco::RightElbow) = elbow_pos;
    at(left ? Coco::LeftWrist : Coco::RightWrist) = wrist;
    at(left ? Coco::LeftHip : Coco::RightHip) = hip_j;
    at(left ? Coco::LeftKnee : Coco::RightKnee) = knee_pos;
    at(left ? Coco::LeftAnkle : Coco::RightAnkle) = ankle;
  }

  SplitMix64 noise(p.noise_seed ^ (static_cast<std::uint64_t>(t_ms) * 0x9E3779B97F4A7C15ull));
  KeypointFrame frame;
  frame.t_ms = t_ms;
  for (std::size_t i = 0; i < kCocoKeypoints; ++i) {
    double x = kp[i].x;
    double y = kp[i].y;
    if (p.jitter_px > 0.0) {
      x += noise.uniform(-p.jitter_px, p.jitter_px);
      y += noise.uniform(-p.jitter_px, p.jitter_px);
    }
    frame.keypoints[i] = {x, p.image_height - y, p.confidence};
  }
  return frame;
}

KeypointStream synthetic_track(double duration_s, double fps, const std::string& name, const RoutineParams& params) {
  KeypointStream out;
  out.header = TrackHeader{std::string(kTrackFormat), fps, name};
  const auto n = static_cast<std::int64_t>(std::llround(duration_s * fps));
  out.frames.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto t_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1000.0 / fps));
    out.frames.push_back(synthetic_frame(t_ms, params));
  }
  return out;
}

KeypointStream shifted(KeypointStream stream, std::int64_t offset_ms) {
  for (KeypointFrame& f : stream.frames) f.t_ms += offset_ms;
  return stream;
}

}  // namespace pyrofit
