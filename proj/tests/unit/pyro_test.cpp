#include <doctest.h>

#include <numbers>
#include <vector>

#include "fixtures.hpp"
#include "pyrofit/errors.hpp"
#include "pyrofit/pyro.hpp"

using namespace pyrofit;
using fixtures::near;

namespace {

FireworkSpec spec_of(Shape shape, Size size, std::uint64_t seed, Vec2 origin = {10, 6}, double angle = 90.0) {
  FireworkSpec s;
  s.origin = origin;
  s.launch_angle_deg = angle;
  s.shape = shape;
  s.size = size;
  s.seed = seed;
  s.color = Color::Multi;
  return s;
}

Firework bloom_at_origin(const FireworkSpec& spec, SceneConfig cfg) {
  cfg.spawn_at_joint = true;
  return spawn(spec, cfg);
}

Firework lone_particle(Vec2 pos, Vec2 vel, double lifetime) {
  Firework fw;
  fw.phase = Phase::Blooming;
  Particle p;
  p.pos = pos;
  p.vel = vel;
  p.lifetime_s = lifetime;
  fw.particles.push_back(p);
  fw.emitted = 1;
  return fw;
}

double angle_of(Vec2 v) { return std::atan2(v.y, v.x) * 180.0 / std::numbers::pi; }

double circular_gap_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

double mean_radius(const Firework& fw) {
  double total = 0.0;
  for (const Particle& p : fw.particles) total += norm(p.pos - fw.burst_center);
  return total / static_cast<double>(fw.particles.size());
}

std::uint64_t empty_digest(int n, const SceneConfig& cfg) {
  Fnv1a64 h;
  for (int k = 1; k <= n; ++k) {
    const std::string line = "t " + std::to_string(step_time_ms(k, cfg)) + " n 0\n";
    h.update(line.data(), line.size());
  }
  return h.digest();
}

}  // namespace

TEST_CASE("rocket launch velocity") {
  SceneConfig cfg;
  cfg.drag = 1.0;
  const Firework fw = spawn(spec_of(Shape::Ball, Size::Large, 1, {4, 6.5}), cfg);
  CHECK(fw.phase == Phase::Launching);
  CHECK(fw.rocket.pos == Vec2{4, 0});
  CHECK(std::abs(fw.rocket.vel.x) < 1e-12);
  CHECK(fw.rocket.vel.y == doctest::Approx(std::sqrt(2 * 9.8 * 6.5)));

  const double theta = 90.0 - std::atan(0.5) * 180.0 / std::numbers::pi;
  const Firework tilted = spawn(spec_of(Shape::Ball, Size::Large, 1, {4, 6.5}, theta), cfg);
  CHECK(tilted.rocket.vel.x / tilted.rocket.vel.y == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rocket reaches its target height before bursting") {
  for (double drag : {1.0, 0.98}) {
    SceneConfig cfg;
    cfg.drag = drag;
    for (double h : {1.0, 4.0, 9.0}) {
      std::vector<Firework> scene = {spawn(spec_of(Shape::Ball, Size::Large, 7, {10, h}), cfg)};
      int guard = 0;
      while (scene[0].phase == Phase::Launching && guard++ < 1000) step(scene, cfg);
      REQUIRE(scene[0].phase == Phase::Blooming);
      CHECK(std::abs(scene[0].burst_center.y - h) < 0.2);
    }
  }
}

TEST_CASE("spawning is deterministic") {
  const SceneConfig cfg;
  const FireworkSpec s = spec_of(Shape::Star, Size::Small, 99);
  const Firework a = spawn(s, cfg);
  const Firework b = spawn(s, cfg);
  CHECK(a.rocket.pos == b.rocket.pos);
  CHECK(a.rocket.vel == b.rocket.vel);
  CHECK(a.rng == b.rng);
  const Firework ea = explode(a, cfg);
  const Firework eb = explode(b, cfg);
  REQUIRE(ea.particles.size() == eb.particles.size());
  for (std::size_t i = 0; i < ea.particles.size(); ++i) CHECK(ea.particles[i].vel == eb.particles[i].vel);
}

TEST_CASE("burst particle counts") {
  const SceneConfig cfg;
  CHECK(bloom_at_origin(spec_of(Shape::Ball, Size::Large, 1), cfg).particles.size() == 100);
  CHECK(bloom_at_origin(spec_of(Shape::Star, Size::Large, 1), cfg).particles.size() == 60);

  std::vector<Firework> scene = {bloom_at_origin(spec_of(Shape::Cluster, Size::Large, 1), cfg)};
  CHECK(scene[0].particles.size() == 30);
  CHECK(scene[0].pending.size() == 6);
  for (int i = 0; i < 40; ++i) step(scene, cfg);
  CHECK(scene[0].pending.empty());
  CHECK(scene[0].emitted == 180);
  CHECK(scene[0].particles.size() + scene[0].expired == 180);
}

TEST_CASE("explode requires a launching firework") {
  const SceneConfig cfg;
  const Firework fw = bloom_at_origin(spec_of(Shape::Ball, Size::Large, 1), cfg);
  CHECK_THROWS_AS(explode(fw, cfg), PhaseError);
}

TEST_CASE("ball speeds stay within the declared band") {
  const SceneConfig cfg;
  for (Size size : {Size::Large, Size::Medium, Size::Small, Size::Tiny}) {
    const double mult = cfg.size_multipliers[static_cast<std::size_t>(size)];
    const Firework fw = bloom_at_origin(spec_of(Shape::Ball, size, 5), cfg);
    for (const Particle& p : fw.particles) {
      CHECK(norm(p.vel) >= 0.5 * cfg.base_speed * mult - 1e-12);
      CHECK(norm(p.vel) < 1.0 * cfg.base_speed * mult);
      CHECK(p.lifetime_s <= cfg.ball_lifetime_s);
    }
  }
}

TEST_CASE("star directions have five-fold symmetry within the jitter bound") {
  const SceneConfig cfg;
  SplitMix64 seeds(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Firework fw = bloom_at_origin(spec_of(Shape::Star, Size::Medium, seeds.next()), cfg);
    std::vector<double> dirs;
    for (const Particle& p : fw.particles) dirs.push_back(angle_of(p.vel));
    for (double d : dirs) {
      const double rotated = d + 72.0;
      double best = 360.0;
      for (double e : dirs) best = std::min(best, circular_gap_deg(rotated, e));
      REQUIRE(best <= 2 * cfg.star_jitter_deg + 1e-9);
    }
    for (double d : dirs) {
      const double off = std::fmod(circular_gap_deg(d, dirs[0]) + 1e-9, 72.0);
      REQUIRE(std::min(off, 72.0 - off) <= 2 * cfg.star_jitter_deg + 1e-6);
    }
  }
}

TEST_CASE("semi-implicit Euler closed form without drag") {
  SceneConfig cfg;
  cfg.drag = 1.0;
  cfg.dt_s = 0.1;
  std::vector<Firework> scene = {lone_particle({0, 0}, {10, 20}, 1e9)};
  for (int n = 1; n <= 200; ++n) {
    step(scene, cfg);
    const Vec2 pos = scene[0].particles[0].pos;
    const double dn = n;
    const double x = dn * cfg.dt_s * 10.0;
    const double y = dn * cfg.dt_s * 20.0 + cfg.dt_s * cfg.dt_s * cfg.gravity * dn * (dn + 1) / 2;
    REQUIRE(near(pos.x, x, 1e-9));
    REQUIRE(near(pos.y, y, 1e-9));
  }
}

TEST_CASE("zero steps leave the scene unchanged") {
  const SceneConfig cfg;
  std::vector<Firework> scene = {spawn(spec_of(Shape::Ball, Size::Large, 3), cfg)};
  const Frame before = render_frame(scene, 0);
  CHECK(canonical_bytes(render_frame(scene, 0)) == canonical_bytes(before));
}

TEST_CASE("particle lifetime") {
  const SceneConfig cfg;
  std::vector<Firework> scene = {lone_particle({5, 5}, {0, 0}, 1.0)};
  for (int i = 0; i < 59; ++i) step(scene, cfg);
  CHECK(scene[0].particles.size() == 1);
  step(scene, cfg);
  step(scene, cfg);
  CHECK(scene[0].particles.empty());
  CHECK(scene[0].expired == 1);
  CHECK(scene[0].phase == Phase::Done);
}

TEST_CASE("render") {
  CHECK(render_frame(std::vector<Firework>{}, 5).points.empty());

  Firework fw = lone_particle({1, 2}, {0, 0}, 2.0);
  fw.particles[0].age_s = 1.0;
  fw.particles[0].color = {0x30, 0x70, 0xff};
  const std::vector<Firework> scene = {fw};
  const Frame f = render_frame(scene, 17);
  REQUIRE(f.points.size() == 1);
  CHECK(f.points[0].alpha == 0.5);
  CHECK(canonical_bytes(f) == "t 17 n 1\n1.000000 2.000000 3070ff 0.500000 0.080000\n");
  CHECK(canonical_bytes(render_frame(scene, 17)) == canonical_bytes(f));
  CHECK(to_json(f).dump() == R"({"points":[[1.0,2.0,"#3070ff",0.5,0.08]],"t_ms":17})");
}

TEST_CASE("alpha fades monotonically") {
  const SceneConfig cfg;
  std::vector<Firework> scene = {lone_particle({5, 5}, {1, 3}, 1.3)};
  double prev = 1.0;
  while (!scene[0].particles.empty()) {
    const Frame f = render_frame(scene, 0);
    CHECK(f.points[0].alpha <= prev);
    CHECK(f.points[0].alpha >= 0.0);
    prev = f.points[0].alpha;
    step(scene, cfg);
  }
}

TEST_CASE("multi colour cycles the palette by particle index") {
  const SceneConfig cfg;
  const Firework fw = bloom_at_origin(spec_of(Shape::Ball, Size::Large, 2), cfg);
  for (std::size_t i = 0; i < fw.particles.size(); ++i) {
    CHECK(fw.particles[i].color == multi_palette(i));
    CHECK(multi_palette(i) == multi_palette(i + 7));
  }
  CHECK(color_rgb(Color::White) == Rgb{0xff, 0xff, 0xff});
}

TEST_CASE("property: conservation over a long run") {
  const SceneConfig cfg;
  SplitMix64 rng(41);
  std::vector<Firework> scene;
  for (Shape shape : {Shape::Star, Shape::Ball, Shape::Cluster}) {
    for (Size size : {Size::Large, Size::Medium, Size::Small, Size::Tiny}) {
      scene.push_back(spawn(spec_of(shape, size, rng.next(), {rng.uniform(2, 18), rng.uniform(2, 10)}), cfg));
    }
  }
  for (int k = 0; k < 600; ++k) {
    step(scene, cfg);
    for (const Firework& fw : scene) REQUIRE(fw.particles.size() + fw.expired == fw.emitted);
  }
  for (const Firework& fw : scene) CHECK(fw.phase == Phase::Done);
}

TEST_CASE("property: explosion radius grows with size") {
  const SceneConfig cfg;
  SplitMix64 rng(42);
  for (Shape shape : {Shape::Star, Shape::Ball, Shape::Cluster}) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::uint64_t seed = rng.next();
      double prev = 0.0;
      for (Size size : {Size::Tiny, Size::Small, Size::Medium, Size::Large}) {
        std::vector<Firework> scene = {bloom_at_origin(spec_of(shape, size, seed), cfg)};
        for (int k = 0; k < 30; ++k) step(scene, cfg);
        const double r = mean_radius(scene[0]);
        REQUIRE(r > prev);
        prev = r;
      }
    }
  }
}

TEST_CASE("run_deterministic") {
  const SceneConfig cfg;
  const std::vector<FireworkSpec> specs = {spec_of(Shape::Ball, Size::Large, 1), spec_of(Shape::Cluster, Size::Tiny, 2),
                                           spec_of(Shape::Star, Size::Medium, 3, {3, 4}, 70)};
  const auto a = run_deterministic(specs, 240, cfg);
  CHECK(a == run_deterministic(specs, 240, cfg));

  std::vector<FireworkSpec> changed = specs;
  changed[1].seed = 22;
  CHECK(run_deterministic(changed, 240, cfg) != a);

  CHECK(run_deterministic({}, 60, cfg) == empty_digest(60, cfg));
  CHECK(digest_hex(0x00ab) == "00000000000000ab");

  int frames = 0;
  run_deterministic(specs, 10, cfg, [&](const Frame& f) { CHECK(f.t_ms == step_time_ms(++frames, cfg)); });
  CHECK(frames == 10);
}

TEST_CASE("ppm raster") {
  const SceneConfig cfg;
  Firework fw = lone_particle({10, 6}, {0, 0}, 1.0);
  fw.particles[0].color = {200, 100, 50};
  const std::string ppm = render_ppm(render_frame(std::vector<Firework>{fw}, 0), cfg, 40, 24);
  const std::string header = "P6\n40 24\n255\n";
  REQUIRE(ppm.size() == header.size() + 40 * 24 * 3);
  CHECK(ppm.compare(0, header.size(), header) == 0);
  const std::size_t centre = header.size() + (12 * 40 + 20) * 3;
  CHECK(static_cast<unsigned char>(ppm[centre]) == 200);
  CHECK(static_cast<unsigned char>(ppm[header.size()]) == 0);
}

TEST_CASE("fixed stepper") {
  FixedStepper stepper(1.0 / 60.0);
  CHECK(stepper.advance_to(1000) == 0);
  int total = 0;
  for (int i = 1; i <= 30; ++i) total += stepper.advance_to(1000 + static_cast<std::int64_t>(std::llround(i * 1000.0 / 30)));
  CHECK(total == 60);
  CHECK(stepper.advance_to(500) == 0);
}

TEST_CASE("scene config validation") {
  SceneConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.size_multipliers = {1.0, 0.75, 0.75, 0.3};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.drag = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dt_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
