#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pyrofit/choreography.hpp"
#include "pyrofit/rng.hpp"

namespace pyrofit {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend constexpr bool operator==(Rgb, Rgb) = default;
};

Rgb color_rgb(Color c);
/// Seven-hue cycle used by Color::Multi, indexed by particle emission order.
Rgb multi_palette(std::size_t particle_index);

struct Particle {
  Vec2 pos;
  Vec2 vel;
  Rgb color;
  double age_s = 0.0;
  double lifetime_s = 1.0;
  double radius = 0.08;
};

enum class Phase : std::uint8_t { Launching, Blooming, Done };

/// A cluster sub-burst waiting for its delay (measured from the main burst).
struct PendingBurst {
  double delay_s = 0.0;
  Vec2 offset;
};

struct Firework {
  FireworkSpec spec;
  Phase phase = Phase::Launching;
  Particle rocket;
  std::vector<Particle> particles;
  std::vector<PendingBurst> pending;
  SplitMix64 rng;
  Vec2 burst_center;
  double bloom_age_s = 0.0;
  std::uint64_t emitted = 0;
  std::uint64_t expired = 0;
};

struct SceneConfig {
  double dt_s = 1.0 / 60.0;
  /// Vertical acceleration, scene units/s^2; must be negative.
  double gravity = -9.8;
  /// Per-step velocity multiplier in (0, 1].
  double drag = 0.98;
  double width = 20.0;
  double height = 12.0;

  double base_speed = 6.0;
  int ball_count = 100;
  int star_count = 60;
  int star_spokes = 5;
  int star_rings = 3;
  double star_jitter_deg = 4.0;
  int cluster_core_count = 30;
  int cluster_bursts = 6;
  int cluster_burst_count = 25;
  /// Large, Medium, Small, Tiny; strictly decreasing.
  std::array<double, 4> size_multipliers = {1.0, 0.75, 0.5, 0.3};
  double ball_lifetime_s = 1.5;
  double star_lifetime_s = 1.2;
  double cluster_lifetime_s = 2.5;
  double particle_radius = 0.08;
  double rocket_radius = 0.12;
  /// Burst directly at the spec origin instead of launching from the ground.
  bool spawn_at_joint = false;

  void validate() const;
};

/// Vertical launch speed whose discrete trajectory peaks at `height`.
/// Closed form sqrt(2|g|h) when drag == 1, bisection on the integrator otherwise.
double launch_speed_for_apex(double height, const SceneConfig& cfg);

/// A rocket at (spec.x, 0) aimed along the launch angle, or an immediate
/// burst at the origin when `spawn_at_joint` is set.
Firework spawn(const FireworkSpec& spec, const SceneConfig& cfg);

/// Converts the rocket into its burst at the rocket's position.
///
/// Random draws, all from `fw.rng`, in this order:
///   Ball     per particle: direction, speed factor in [0.5, 1), lifetime factor in [0.85, 1)
///   Star     one spoke orientation; then per particle: angular jitter, lifetime factor.
///            Particle j sits on spoke j % spokes and speed ring (j / spokes) % rings.
///   Cluster  core ball as above (speed scale 0.6); then per sub-burst: delay in
///            [0.2, 0.5) s, offset-angle jitter, offset distance. Sub-burst particles
///            are drawn ball-style (speed scale 0.35) when the sub-burst fires.
/// Throws PhaseError unless the firework is Launching.
Firework explode(Firework fw, const SceneConfig& cfg);

/// One fixed step: vel <- (vel + g dt) * drag; pos <- pos + vel dt; age += dt.
/// Expired particles are removed, due sub-bursts fire, rockets past their
/// apex explode and exhausted fireworks become Done.
void step(std::vector<Firework>& scene, const SceneConfig& cfg);

struct FramePoint {
  double x = 0.0;
  double y = 0.0;
  Rgb color;
  double alpha = 1.0;
  double radius = 0.0;
};

struct Frame {
  std::int64_t t_ms = 0;
  std::vector<FramePoint> points;
};

/// Live particles with alpha = 1 - age/lifetime; rockets in flight are drawn at alpha 1.
Frame render_frame(std::span<const Firework> scene, std::int64_t t_ms);

/// `{"t_ms": .., "points": [[x, y, "#rrggbb", alpha, radius], ...]}`
nlohmann::json to_json(const Frame& frame);

/// Digest input: "t <t_ms> n <count>\n" then one "%.6f %.6f rrggbb %.6f %.6f\n" line per point.
std::string canonical_bytes(const Frame& frame);

/// Binary PPM (P6) with additive point splatting; y up.
std::string render_ppm(const Frame& frame, const SceneConfig& cfg, int width_px, int height_px);

/// Spawns every spec at t = 0, steps `n_steps` times and hashes the canonical
/// bytes of the frame rendered after each step. `on_frame` sees every frame.
std::uint64_t run_deterministic(std::span<const FireworkSpec> specs, int n_steps, const SceneConfig& cfg,
                                const std::function<void(const Frame&)>& on_frame = {});

std::string digest_hex(std::uint64_t digest);

/// Frame time for step `k` at the configured timestep.
std::int64_t step_time_ms(std::int64_t k, const SceneConfig& cfg);

/// Converts wall-clock milliseconds into a whole number of fixed steps.
class FixedStepper {
 public:
  explicit FixedStepper(double dt_s) : dt_s_(dt_s) {}

  /// Steps due when the clock moves to `t_ms`. The first call starts the clock.
  int advance_to(std::int64_t t_ms);

 private:
  double dt_s_;
  double accumulator_s_ = 0.0;
  std::int64_t last_ms_ = 0;
  bool started_ = false;
};

}  // namespace pyrofit
