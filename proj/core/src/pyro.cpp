#include "pyrofit/pyro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pyrofit/errors.hpp"

namespace pyrofit {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRocketLifetime = 60.0;
constexpr double kClusterCoreSpeed = 0.6;
constexpr double kClusterBurstSpeed = 0.35;
constexpr double kClusterBurstLifetime = 0.6;

constexpr std::array<Rgb, 7> kMultiPalette = {{
    {0xff, 0x30, 0x30},
    {0xff, 0x90, 0x20},
    {0xff, 0xe0, 0x30},
    {0x30, 0xe0, 0x60},
    {0x30, 0xd0, 0xff},
    {0x30, 0x70, 0xff},
    {0xa0, 0x40, 0xff},
}};

double size_multiplier(Size s, const SceneConfig& cfg) { return cfg.size_multipliers[static_cast<std::size_t>(s)]; }

Vec2 direction(double radians) { return {std::cos(radians), std::sin(radians)}; }

void integrate(Particle& p, const SceneConfig& cfg) {
  p.vel = (p.vel + Vec2{0.0, cfg.gravity * cfg.dt_s}) * cfg.drag;
  p.pos = p.pos + p.vel * cfg.dt_s;
  p.age_s += cfg.dt_s;
}

Particle emit(Firework& fw, Vec2 pos, Vec2 vel, double lifetime, const SceneConfig& cfg) {
  Particle p;
  p.pos = pos;
  p.vel = vel;
  p.color = fw.spec.color == Color::Multi ? multi_palette(fw.emitted) : color_rgb(fw.spec.color);
  p.lifetime_s = lifetime;
  p.radius = cfg.particle_radius * size_multiplier(fw.spec.size, cfg);
  ++fw.emitted;
  return p;
}

void emit_ball(Firework& fw, Vec2 center, int count, double speed_scale, double lifetime, const SceneConfig& cfg) {
  const double base = cfg.base_speed * size_multiplier(fw.spec.size, cfg) * speed_scale;
  for (int i = 0; i < count; ++i) {
    const double theta = fw.rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = fw.rng.uniform(0.5, 1.0) * base;
    const double life = fw.rng.uniform(0.85, 1.0) * lifetime;
    fw.particles.push_back(emit(fw, center, direction(theta) * speed, life, cfg));
  }
}

void emit_star(Firework& fw, Vec2 center, const SceneConfig& cfg) {
  const double base = cfg.base_speed * size_multiplier(fw.spec.size, cfg);
  const double spoke0 = fw.rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double spoke_step = 2.0 * std::numbers::pi / cfg.star_spokes;
  for (int j = 0; j < cfg.star_count; ++j) {
    const int spoke = j % cfg.star_spokes;
    const int ring = (j / cfg.star_spokes) % cfg.star_rings;
    const double jitter = fw.rng.uniform(-cfg.star_jitter_deg, cfg.star_jitter_deg) * kDegToRad;
    const double life = fw.rng.uniform(0.85, 1.0) * cfg.star_lifetime_s;
    // Rings run from 0.4 to 1.0 of the base speed.
    const double ring_speed = cfg.star_rings == 1 ? 1.0 : 0.4 + 0.6 * ring / (cfg.star_rings - 1);
    const Vec2 vel = direction(spoke0 + spoke * spoke_step + jitter) * (ring_speed * base);
    fw.particles.push_back(emit(fw, center, vel, life, cfg));
  }
}

void fire_due_bursts(Firework& fw, const SceneConfig& cfg) {
  auto it = fw.pending.begin();
  while (it != fw.pending.end()) {
    if (it->delay_s <= fw.bloom_age_s) {
      const Vec2 center = fw.burst_center + it->offset;
      it = fw.pending.erase(it);
      emit_ball(fw, center, cfg.cluster_burst_count, kClusterBurstSpeed, kClusterBurstLifetime * cfg.cluster_lifetime_s,
                cfg);
    } else {
      ++it;
    }
  }
}

void print_point(std::string& out, const FramePoint& p) {
  char buf[160];
  const int n = std::snprintf(buf, sizeof buf, "%.6f %.6f %02x%02x%02x %.6f %.6f\n", p.x, p.y, p.color.r, p.color.g,
                              p.color.b, p.alpha, p.radius);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

Rgb color_rgb(Color c) {
  switch (c) {
    case Color::White: return {0xff, 0xff, 0xff};
    case Color::Purple: return {0xa0, 0x40, 0xff};
    case Color::Blue: return {0x30, 0x70, 0xff};
    case Color::Green: return {0x30, 0xe0, 0x60};
    case Color::Orange: return {0xff, 0x90, 0x20};
    case Color::Yellow: return {0xff, 0xe0, 0x30};
    case Color::Multi: return kMultiPalette[0];
  }
  return {0xff, 0xff, 0xff};
}

Rgb multi_palette(std::size_t particle_index) { return kMultiPalette[particle_index % kMultiPalette.size()]; }

void SceneConfig::validate() const {
  if (!(dt_s > 0.0)) throw ConfigError("dt_s must be > 0");
  if (!(gravity < 0.0)) throw ConfigError("gravity must be < 0");
  if (!(drag > 0.0 && drag <= 1.0)) throw ConfigError("drag must be in (0, 1]");
  if (!(width > 0.0 && height > 0.0)) throw ConfigError("width and height must be > 0");
  if (!(base_speed > 0.0)) throw ConfigError("base_speed must be > 0");
  if (ball_count < 0 || star_count < 0 || cluster_core_count < 0 || cluster_bursts < 0 || cluster_burst_count < 0) {
    throw ConfigError("particle counts must be >= 0");
  }
  if (star_spokes < 1 || star_rings < 1) throw ConfigError("star_spokes and star_rings must be >= 1");
  for (std::size_t i = 0; i < size_multipliers.size(); ++i) {
    if (!(size_multipliers[i] > 0.0)) throw ConfigError("size_multipliers must be > 0");
    if (i > 0 && !(size_multipliers[i] < size_multipliers[i - 1])) {
      throw ConfigError("size_multipliers must be strictly decreasing large -> tiny");
    }
  }
  if (!(ball_lifetime_s > 0.0 && star_lifetime_s > 0.0 && cluster_lifetime_s > 0.0)) {
    throw ConfigError("lifetimes must be > 0");
  }
}

double launch_speed_for_apex(double height, const SceneConfig& cfg) {
  if (height <= 0.0) return 0.0;
  if (cfg.drag == 1.0) return std::sqrt(2.0 * std::abs(cfg.gravity) * height);

  const auto apex = [&](double vy) {
    double y = 0.0;
    while (true) {
      vy = (vy + cfg.gravity * cfg.dt_s) * cfg.drag;
      y += vy * cfg.dt_s;
      if (vy <= 0.0) return y;
    }
  };
  double lo = 0.0;
  double hi = std::sqrt(2.0 * std::abs(cfg.gravity) * height);
  while (apex(hi) < height) hi *= 2.0;
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    (apex(mid) < height ? lo : hi) = mid;
  }
  return hi;
}

Firework spawn(const FireworkSpec& spec, const SceneConfig& cfg) {
  Firework fw;
  fw.spec = spec;
  fw.rng = SplitMix64(spec.seed);
  fw.rocket.color = spec.color == Color::Multi ? multi_palette(0) : color_rgb(spec.color);
  fw.rocket.radius = cfg.rocket_radius;
  fw.rocket.lifetime_s = kRocketLifetime;
  if (cfg.spawn_at_joint) {
    fw.rocket.pos = spec.origin;
    return explode(std::move(fw), cfg);
  }
  const double theta = spec.launch_angle_deg * kDegToRad;
  const double vy = launch_speed_for_apex(spec.origin.y, cfg);
  fw.rocket.pos = {spec.origin.x, 0.0};
  // vx / vy = cot(theta)
  fw.rocket.vel = {vy * std::cos(theta) / std::sin(theta), vy};
  return fw;
}

Firework explode(Firework fw, const SceneConfig& cfg) {
  if (fw.phase != Phase::Launching) throw PhaseError("explode requires a launching firework");
  fw.phase = Phase::Blooming;
  fw.burst_center = fw.rocket.pos;
  fw.bloom_age_s = 0.0;
  const double mult = size_multiplier(fw.spec.size, cfg);
  switch (fw.spec.shape) {
    case Shape::Ball:
      emit_ball(fw, fw.burst_center, cfg.ball_count, 1.0, cfg.ball_lifetime_s, cfg);
      break;
    case Shape::Star:
      emit_star(fw, fw.burst_center, cfg);
      break;
    case Shape::Cluster: {
      emit_ball(fw, fw.burst_center, cfg.cluster_core_count, kClusterCoreSpeed, cfg.cluster_lifetime_s, cfg);
      const double slice = 2.0 * std::numbers::pi / std::max(cfg.cluster_bursts, 1);
      for (int b = 0; b < cfg.cluster_bursts; ++b) {
        PendingBurst pb;
        pb.delay_s = fw.rng.uniform(0.2, 0.5);
        const double angle = b * slice + fw.rng.uniform(-0.25, 0.25) * slice;
        const double distance = fw.rng.uniform(0.6, 1.2) * mult;
        pb.offset = direction(angle) * distance;
        fw.pending.push_back(pb);
      }
      break;
    }
  }
  return fw;
}

void step(std::vector<Firework>& scene, const SceneConfig& cfg) {
  for (Firework& fw : scene) {
    switch (fw.phase) {
      case Phase::Done:
        break;
      case Phase::Launching:
        integrate(fw.rocket, cfg);
        if (fw.rocket.vel.y <= 0.0) fw = explode(std::move(fw), cfg);
        break;
      case Phase::Blooming: {
        for (Particle& p : fw.particles) integrate(p, cfg);
        const auto dead = std::remove_if(fw.particles.begin(), fw.particles.end(),
                                         [](const Particle& p) { return p.age_s >= p.lifetime_s; });
        fw.expired += static_cast<std::uint64_t>(fw.particles.end() - dead);
        fw.particles.erase(dead, fw.particles.end());
        fw.bloom_age_s += cfg.dt_s;
        fire_due_bursts(fw, cfg);
        if (fw.particles.empty() && fw.pending.empty()) fw.phase = Phase::Done;
        break;
      }
    }
  }
}

Frame render_frame(std::span<const Firework> scene, std::int64_t t_ms) {
  Frame frame;
  frame.t_ms = t_ms;
  for (const Firework& fw : scene) {
    if (fw.phase == Phase::Launching) {
      frame.points.push_back({fw.rocket.pos.x, fw.rocket.pos.y, fw.rocket.color, 1.0, fw.rocket.radius});
    }
    for (const Particle& p : fw.particles) {
      const double alpha = std::clamp(1.0 - p.age_s / p.lifetime_s, 0.0, 1.0);
      frame.points.push_back({p.pos.x, p.pos.y, p.color, alpha, p.radius});
    }
  }
  return frame;
}

json to_json(const Frame& frame) {
  json points = json::array();
  for (const FramePoint& p : frame.points) {
    char hex[8];
    std::snprintf(hex, sizeof hex, "#%02x%02x%02x", p.color.r, p.color.g, p.color.b);
    points.push_back({p.x, p.y, hex, p.alpha, p.radius});
  }
  return json{{"t_ms", frame.t_ms}, {"points", std::move(points)}};
}

std::string canonical_bytes(const Frame& frame) {
  std::string out = "t " + std::to_string(frame.t_ms) + " n " + std::to_string(frame.points.size()) + "\n";
  for (const FramePoint& p : frame.points) print_point(out, p);
  return out;
}

std::string render_ppm(const Frame& frame, const SceneConfig& cfg, int width_px, int height_px) {
  const std::string header = "P6\n" + std::to_string(width_px) + " " + std::to_string(height_px) + "\n255\n";
  std::vector<double> accum(static_cast<std::size_t>(width_px) * height_px * 3, 0.0);
  const double sx = width_px / cfg.width;
  const double sy = height_px / cfg.height;
  for (const FramePoint& p : frame.points) {
    const double cx = p.x * sx;
    const double cy = (cfg.height - p.y) * sy;
    const double r = std::max(1.0, p.radius * sx);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(width_px - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(height_px - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy > r * r) continue;
        double* px = &accum[(static_cast<std::size_t>(y) * width_px + x) * 3];
        px[0] += p.color.r * p.alpha;
        px[1] += p.color.g * p.alpha;
        px[2] += p.color.b * p.alpha;
      }
    }
  }
  std::string out = header;
  out.reserve(header.size() + accum.size());
  for (double v : accum) out.push_back(static_cast<char>(static_cast<unsigned char>(std::min(255.0, std::round(v)))));
  return out;
}

std::int64_t step_time_ms(std::int64_t k, const SceneConfig& cfg) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(k) * cfg.dt_s * 1000.0));
}

std::uint64_t run_deterministic(std::span<const FireworkSpec> specs, int n_steps, const SceneConfig& cfg,
                                const std::function<void(const Frame&)>& on_frame) {
  std::vector<Firework> scene;
  scene.reserve(specs.size());
  for (const FireworkSpec& spec : specs) scene.push_back(spawn(spec, cfg));

  Fnv1a64 hash;
  for (int k = 1; k <= n_steps; ++k) {
    step(scene, cfg);
    const Frame frame = render_frame(scene, step_time_ms(k, cfg));
    const std::string bytes = canonical_bytes(frame);
    hash.update(bytes.data(), bytes.size());
    if (on_frame) on_frame(frame);
  }
  return hash.digest();
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

int FixedStepper::advance_to(std::int64_t t_ms) {
  if (!started_) {
    started_ = true;
    last_ms_ = t_ms;
    return 0;
  }
  if (t_ms <= last_ms_) return 0;
  accumulator_s_ += static_cast<double>(t_ms - last_ms_) / 1000.0;
  last_ms_ = t_ms;
  int steps = 0;
  while (accumulator_s_ + 1e-12 >= dt_s_) {
    accumulator_s_ -= dt_s_;
    ++steps;
  }
  return steps;
}

}  // namespace pyrofit
