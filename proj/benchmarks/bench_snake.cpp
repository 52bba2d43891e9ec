#include <benchmark/benchmark.h>

#include "ctree/snake.hpp"

using namespace ctree;
using namespace ctree::snake;

static SnakeRun run_for(double step, int d) {
  SpatialConfig cfg;
  cfg.dimension = d;
  cfg.step = step;
  return {Point(static_cast<std::size_t>(d), 0.0), cfg, 0.1, 2.0};
}

static void BM_GridSnake(benchmark::State& state) {
  Rng rng(1);
  auto run = run_for(1.0 / static_cast<double>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(grid_snake(run, rng));
}
BENCHMARK(BM_GridSnake)->Arg(50)->Arg(100)->Arg(200);

static void BM_StreamingOuterReach(benchmark::State& state) {
  Rng rng(2);
  auto run = run_for(1.0 / static_cast<double>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_outer_reach(run, 1.0, rng));
}
BENCHMARK(BM_StreamingOuterReach)->Arg(50)->Arg(100)->Arg(200);

static void BM_OdeOracle(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(OdeOracle1d(1.0).center_value());
}
BENCHMARK(BM_OdeOracle);
