#include <benchmark/benchmark.h>

#include "pyrofit/pyro.hpp"

using namespace pyrofit;

namespace {

std::vector<Firework> scene_of(int count, const SceneConfig& cfg) {
  SplitMix64 rng(7);
  std::vector<Firework> scene;
  for (int i = 0; i < count; ++i) {
    FireworkSpec s;
    s.origin = {rng.uniform(2, 18), rng.uniform(2, 10)};
    s.shape = static_cast<Shape>(i % 3);
    s.size = Size::Large;
    s.color = Color::Multi;
    s.seed = rng.next();
    scene.push_back(explode(spawn(s, cfg), cfg));
  }
  return scene;
}

void BM_PyroStep(benchmark::State& state) {
  SceneConfig cfg;
  cfg.ball_lifetime_s = cfg.star_lifetime_s = cfg.cluster_lifetime_s = 1e9;
  std::vector<Firework> scene = scene_of(static_cast<int>(state.range(0)), cfg);
  std::size_t particles = 0;
  for (const auto& fw : scene) particles += fw.particles.size();
  for (auto _ : state) {
    step(scene, cfg);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * particles));
}
BENCHMARK(BM_PyroStep)->Arg(1)->Arg(8)->Arg(64);

void BM_RenderFrame(benchmark::State& state) {
  SceneConfig cfg;
  const std::vector<Firework> scene = scene_of(8, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(canonical_bytes(render_frame(scene, 0)));
}
BENCHMARK(BM_RenderFrame);

void BM_RunDeterministic(benchmark::State& state) {
  SceneConfig cfg;
  SplitMix64 rng(11);
  std::vector<FireworkSpec> specs(8);
  for (auto& s : specs) {
    s.origin = {rng.uniform(2, 18), rng.uniform(2, 10)};
    s.seed = rng.next();
  }
  for (auto _ : state) benchmark::DoNotOptimize(run_deterministic(specs, 600, cfg));
}
BENCHMARK(BM_RunDeterministic);

}  // namespace
