#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <string>
#include <utility>

#include "pyrofit/frame_io.hpp"
#include "pyrofit/pyro.hpp"
#include "pyrofit/rng.hpp"
#include "pyrofit/skeleton.hpp"

namespace fixtures {

using pyrofit::Coco;
using pyrofit::Joint13;
using pyrofit::KeypointFrame;
using pyrofit::Pose13;
using pyrofit::SplitMix64;
using pyrofit::Vec2;

inline constexpr std::array<Coco, pyrofit::kJointCount> kCocoOf = {
    Coco::Nose,      Coco::RightShoulder, Coco::RightElbow, Coco::RightWrist, Coco::LeftShoulder,
    Coco::LeftElbow, Coco::LeftWrist,     Coco::RightHip,   Coco::RightKnee,  Coco::RightAnkle,
    Coco::LeftHip,   Coco::LeftKnee,      Coco::LeftAnkle,
};

/// Standing, arms hanging, torso length 1, hip midpoint at the origin.
inline Pose13 upright(std::int64_t t_ms = 0) {
  Pose13 p;
  p.t_ms = t_ms;
  const auto set = [&](Joint13 j, double x, double y) {
    p.joints[pyrofit::index(j)] = {x, y};
    p.valid[pyrofit::index(j)] = true;
  };
  set(Joint13::Head, 0.0, 1.4);
  set(Joint13::RShoulder, -0.5, 1.0);
  set(Joint13::LShoulder, 0.5, 1.0);
  set(Joint13::RElbow, -0.6, 0.5);
  set(Joint13::LElbow, 0.6, 0.5);
  set(Joint13::RWrist, -0.65, 0.05);
  set(Joint13::LWrist, 0.65, 0.05);
  set(Joint13::RHip, -0.3, 0.0);
  set(Joint13::LHip, 0.3, 0.0);
  set(Joint13::RKnee, -0.3, -1.0);
  set(Joint13::LKnee, 0.3, -1.0);
  set(Joint13::RAnkle, -0.3, -2.0);
  set(Joint13::LAnkle, 0.3, -2.0);
  return p;
}

inline void put(Pose13& p, Joint13 j, Vec2 v) {
  p.joints[pyrofit::index(j)] = v;
  p.valid[pyrofit::index(j)] = true;
}

inline void mask(Pose13& p, Joint13 j) { p.valid[pyrofit::index(j)] = false; }

/// Wrists (both) at height y, keeping their x.
inline void wrists_at(Pose13& p, double y) {
  put(p, Joint13::RWrist, {p[Joint13::RWrist].x, y});
  put(p, Joint13::LWrist, {p[Joint13::LWrist].x, y});
}

/// Image-space COCO frame whose canonical reduction is `p` (scaled by `px`
/// per torso unit, hip midpoint at `hip_px`, image height `h`). Eyes and ears
/// sit beside the nose.
inline KeypointFrame to_frame(const Pose13& p, double px = 100.0, Vec2 hip_px = {320.0, 300.0}, double h = 480.0,
                              double confidence = 0.9) {
  KeypointFrame f;
  f.t_ms = p.t_ms;
  const auto image = [&](Vec2 c) { return Vec2{hip_px.x + c.x * px, h - ((h - hip_px.y) + c.y * px)}; };
  for (std::size_t j = 0; j < pyrofit::kJointCount; ++j) {
    const Vec2 v = image(p.joints[j]);
    f.keypoints[static_cast<std::size_t>(kCocoOf[j])] = {v.x, v.y, p.valid[j] ? confidence : 0.0};
  }
  const Vec2 nose = image(p[Joint13::Head]);
  const double conf = p.is_valid(Joint13::Head) ? confidence : 0.0;
  f.keypoints[static_cast<std::size_t>(Coco::LeftEye)] = {nose.x + 5, nose.y - 5, conf};
  f.keypoints[static_cast<std::size_t>(Coco::RightEye)] = {nose.x - 5, nose.y - 5, conf};
  f.keypoints[static_cast<std::size_t>(Coco::LeftEar)] = {nose.x + 10, nose.y, conf};
  f.keypoints[static_cast<std::size_t>(Coco::RightEar)] = {nose.x - 10, nose.y, conf};
  return f;
}

/// Random image-space frame with every keypoint valid and a non-degenerate torso.
inline KeypointFrame random_frame(SplitMix64& rng, std::int64_t t_ms = 0) {
  KeypointFrame f;
  f.t_ms = t_ms;
  for (auto& kp : f.keypoints) kp = {rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0), rng.uniform(0.35, 1.0)};
  auto& ls = f.keypoints[static_cast<std::size_t>(Coco::LeftShoulder)];
  auto& lh = f.keypoints[static_cast<std::size_t>(Coco::LeftHip)];
  lh.y = ls.y + rng.uniform(40.0, 200.0);
  return f;
}

/// Random canonical pose with all joints valid, standing roughly upright.
inline Pose13 random_pose(SplitMix64& rng, std::int64_t t_ms = 0) {
  Pose13 p = upright(t_ms);
  for (std::size_t j = 0; j < pyrofit::kJointCount; ++j) {
    p.joints[j] = p.joints[j] + Vec2{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
  }
  return p;
}

/// Pose mirrored about the vertical axis with L/R roles swapped.
inline Pose13 mirror_pose(const Pose13& p) {
  Pose13 m = p;
  for (std::size_t j = 0; j < pyrofit::kJointCount; ++j) {
    const auto to = pyrofit::index(pyrofit::mirrored(static_cast<Joint13>(j)));
    m.joints[to] = {-p.joints[j].x, p.joints[j].y};
    m.valid[to] = p.valid[j];
  }
  return m;
}

inline bool near(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    SplitMix64 rng(static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)) ^
                   static_cast<std::uint64_t>(std::hash<std::string>{}(tag)));
    path_ = std::filesystem::temp_directory_path() / ("pyrofit-" + tag + "-" + pyrofit::digest_hex(rng.next()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_stream(const std::filesystem::path& path, const pyrofit::KeypointStream& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (s.header) out << pyrofit::header_to_json(*s.header).dump() << '\n';
  for (const auto& f : s.frames) out << pyrofit::serialize_frame(f) << '\n';
}

}  // namespace fixtures
