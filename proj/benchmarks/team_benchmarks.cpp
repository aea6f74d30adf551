#include <benchmark/benchmark.h>

#include <vector>

#include "team/baselines.hpp"
#include "team/mapping.hpp"
#include "team/trilateration.hpp"
#include "team/world.hpp"

using namespace team;

namespace {

Environment room() {
  const double o = 0.5 * kDefaultResolution;
  const Point2 a{o, o}, b{10 + o, o}, c{10 + o, 8 + o}, d{o, 8 + o};
  return Environment({{a, b}, {b, c}, {c, d}, {d, a}}, {-0.5, -0.5, 10.5, 8.5});
}

Scan scan_at(const Environment& env, const Pose2& pose) {
  RandomStream rng(1);
  return lidar_scan(LidarModel{}, env, pose, 0.0, rng);
}

}  // namespace

static void Trilaterate(benchmark::State& state) {
  const std::vector<AnchorFix> fixes{{0, {0, 0}, 1.43, 0}, {1, {4, 0}, 3.14, 0}, {2, {0, 3}, 2.21, 0}};
  for (auto _ : state) benchmark::DoNotOptimize(trilaterate_2d(fixes));
}
BENCHMARK(Trilaterate);

static void UpdateEstimate(benchmark::State& state) {
  std::vector<AnchorFix> fixes;
  for (int i = 0; i < state.range(0); ++i) {
    fixes.push_back({i, {1.5 * i, i % 2 ? 3.0 : 0.0}, 1.0 + 0.5 * i, 0});
  }
  const PositionEstimate prev{{1, 1, 0}, EstimateSource::kTrilaterated, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_estimate(prev, {0.01, 0, 0, 0}, fixes, 0.5));
  }
}
BENCHMARK(UpdateEstimate)->Arg(3)->Arg(10)->Arg(30);

static void IntegrateScan(benchmark::State& state) {
  const Environment env = room();
  const Pose2 pose{5, 4, 0.3};
  const Scan scan = scan_at(env, pose);
  OccupancyGrid grid;
  for (auto _ : state) integrate_scan(grid, scan, pose);
}
BENCHMARK(IntegrateScan);

static void MergeMaps(benchmark::State& state) {
  const Environment env = room();
  OccupancyGrid a, b;
  integrate_scan(a, scan_at(env, {3, 4, 0}), {3, 4, 0});
  integrate_scan(b, scan_at(env, {7, 4, 0}), {7, 4, 0});
  for (auto _ : state) {
    OccupancyGrid dst = a;
    merge_into(dst, b);
    benchmark::DoNotOptimize(dst);
  }
}
BENCHMARK(MergeMaps);

static void ParticleUpdate(benchmark::State& state) {
  const Environment env = room();
  const Pose2 pose{5, 4, 0.3};
  const Scan scan = scan_at(env, pose);
  PfConfig config;
  config.n_particles = static_cast<int>(state.range(0));
  RandomStream rng(2);
  auto particles = make_particles(config, pose, env.truth_raster());
  for (auto _ : state) {
    pf_predict(particles, {0.02, 0, 0.01, 0}, config, rng);
    pf_update(particles, scan, config, 0.0);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(ParticleUpdate)->Arg(1)->Arg(10)->Arg(50)->Complexity(benchmark::oN);

BENCHMARK_MAIN();
