#include <benchmark/benchmark.h>

#include "pyrofit/session.hpp"
#include "pyrofit/similarity.hpp"
#include "pyrofit/synthetic.hpp"

using namespace pyrofit;

namespace {

std::shared_ptr<const DemoTrack> demo_of(double seconds) {
  return std::make_shared<const DemoTrack>(build_demo_track(synthetic_track(seconds, 30.0, "routine")));
}

RoutineParams user_params() {
  RoutineParams p;
  p.phase_s = 0.3;
  p.jitter_px = 5.0;
  return p;
}

void BM_ReducePose(benchmark::State& state) {
  const KeypointFrame f = synthetic_frame(1234, user_params());
  for (auto _ : state) benchmark::DoNotOptimize(reduce_to_pose13(f));
}
BENCHMARK(BM_ReducePose);

void BM_AlignAndScore(benchmark::State& state) {
  const auto demo = demo_of(static_cast<double>(state.range(0)));
  const Pose13 user = reduce_to_pose13(synthetic_frame(4000, user_params()));
  for (auto _ : state) benchmark::DoNotOptimize(align_and_score(user, *demo));
}
BENCHMARK(BM_AlignAndScore)->Arg(10)->Arg(60)->Arg(600);

void BM_IngestFrame(benchmark::State& state) {
  const auto demo = demo_of(60.0);
  const KeypointStream user = synthetic_track(60.0, 30.0, "user", user_params());
  Session s = open_session(demo, {}, 1);
  std::size_t i = 0;
  std::int64_t base = 0;
  for (auto _ : state) {
    if (i == user.frames.size()) {
      i = 0;
      base += 60000;
    }
    KeypointFrame f = user.frames[i++];
    f.t_ms += base;
    benchmark::DoNotOptimize(s.ingest_frame(f));
  }
}
BENCHMARK(BM_IngestFrame);

}  // namespace
