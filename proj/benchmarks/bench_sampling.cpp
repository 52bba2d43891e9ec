#include <benchmark/benchmark.h>

#include "ctree/crt.hpp"
#include "ctree/excursion.hpp"
#include "ctree/gw.hpp"

using namespace ctree;

static void BM_ConditionedSize(benchmark::State& state) {
  Rng rng(1);
  auto law = OffspringLaw::geometric();
  for (auto _ : state) benchmark::DoNotOptimize(sample_conditioned_size(law, static_cast<std::size_t>(state.range(0)), rng));
}
BENCHMARK(BM_ConditionedSize)->RangeMultiplier(10)->Range(100, 10000);

static void BM_ForestHeightProcess(benchmark::State& state) {
  Rng rng(2);
  auto law = OffspringLaw::poisson();
  for (auto _ : state) benchmark::DoNotOptimize(forest_height_process(law, static_cast<std::size_t>(state.range(0)), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestHeightProcess)->RangeMultiplier(10)->Range(1000, 100000);

static void BM_VervaatExcursion(benchmark::State& state) {
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(vervaat_excursion(1.0 / static_cast<double>(state.range(0)), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VervaatExcursion)->RangeMultiplier(10)->Range(1000, 100000);

static void BM_MarginalDirect(benchmark::State& state) {
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sample_marginal_direct(static_cast<int>(state.range(0)), rng));
}
BENCHMARK(BM_MarginalDirect)->DenseRange(1, 9, 4);
