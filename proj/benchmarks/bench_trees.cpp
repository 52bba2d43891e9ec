#include <benchmark/benchmark.h>

#include "ctree/gw.hpp"
#include "ctree/real_tree.hpp"
#include "ctree/trees.hpp"

using namespace ctree;

static void BM_EnumerateTrees(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_trees(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_EnumerateTrees)->DenseRange(8, 11);

static void BM_LukasiewiczRoundTrip(benchmark::State& state) {
  Rng rng(1);
  auto tree = sample_conditioned_size(OffspringLaw::geometric(), static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    auto x = lukasiewicz_of(tree);
    benchmark::DoNotOptimize(tree_from_lukasiewicz(x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LukasiewiczRoundTrip)->RangeMultiplier(10)->Range(1000, 100000);

static void BM_HeightFromWalk(benchmark::State& state) {
  Rng rng(2);
  auto tree = sample_conditioned_size(OffspringLaw::poisson(), static_cast<std::size_t>(state.range(0)), rng);
  auto x = lukasiewicz_of(tree);
  for (auto _ : state) benchmark::DoNotOptimize(height_from_lukasiewicz(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HeightFromWalk)->RangeMultiplier(10)->Range(1000, 100000);

static void BM_CodedTreeDistance(benchmark::State& state) {
  Rng rng(3);
  auto e = vervaat_excursion(1.0 / static_cast<double>(state.range(0)), rng);
  CodedTree g(e);
  for (auto _ : state) benchmark::DoNotOptimize(g.distance(rng.uniform(), rng.uniform()));
}
BENCHMARK(BM_CodedTreeDistance)->RangeMultiplier(16)->Range(1 << 10, 1 << 18);

static void BM_GhExact(benchmark::State& state) {
  auto a = segment_metric(1.0, static_cast<std::size_t>(state.range(0)));
  auto b = segment_metric(2.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gh_exact(a, b));
}
BENCHMARK(BM_GhExact)->DenseRange(3, 6);
