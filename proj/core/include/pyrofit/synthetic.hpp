#pragma once

#include <cstdint>
#include <string>

#include "pyrofit/frame_io.hpp"

namespace pyrofit {

/// A procedural calisthenics routine (arm raises, elbow bends, squats and a
/// side lean) rendered as COCO-17 image keypoints. Used for fixtures,
/// benchmarks and sample tracks.
struct RoutineParams {
  double hip_x = 320.0;
  double image_height = 480.0;
  double torso_px = 100.0;
  double period_s = 4.0;
  /// Degrees of arm raise from hanging (0) to overhead (180): [min, max].
  double arm_min_deg = 10.0;
  double arm_max_deg = 170.0;
  double elbow_max_deg = 40.0;
  double knee_max_deg = 50.0;
  double lean_max_deg = 8.0;
  /// Phase offset in seconds.
  double phase_s = 0.0;
  double confidence = 0.9;
  /// Uniform per-coordinate noise amplitude in pixels, drawn from `noise_seed`.
  double jitter_px = 0.0;
  std::uint64_t noise_seed = 1;
};

KeypointFrame synthetic_frame(std::int64_t t_ms, const RoutineParams& params = {});

/// Frames at t = round(i * 1000 / fps) ms for i in [0, duration * fps).
KeypointStream synthetic_track(double duration_s, double fps, const std::string& name,
                               const RoutineParams& params = {});

/// Every frame of `stream` shifted later by `offset_ms`.
KeypointStream shifted(KeypointStream stream, std::int64_t offset_ms);

}  // namespace pyrofit
