#include <benchmark/benchmark.h>

#include "covstein/analytic.hpp"
#include "covstein/coupling.hpp"
#include "covstein/simulate.hpp"

using namespace covstein;

static void BM_ExactPlanarVolume(benchmark::State& state) {
  const ModelParams p(2, state.range(0), 1.0);
  const PointConfiguration cfg = sample_configuration(p, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(covered_volume(cfg, 1.0, VolumeMethod::exact_2d()).value);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactPlanarVolume)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_IsolatedCount(benchmark::State& state) {
  const ModelParams p(static_cast<int>(state.range(1)), state.range(0), 1.0);
  const PointConfiguration cfg = sample_configuration(p, 7);
  for (auto _ : state) benchmark::DoNotOptimize(isolated_count(cfg, 1.0));
}
BENCHMARK(BM_IsolatedCount)->ArgsProduct({{1000, 100000}, {1, 2, 3}});

static void BM_IntegralJ(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integral_J(2.0, d, 1.0));
}
BENCHMARK(BM_IntegralJ)->DenseRange(1, 3);

static void BM_Replicates(benchmark::State& state) {
  const ModelParams p(1, 2000, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_replicates(p, 100, 1, VolumeMethod::exact_1d(), 1).size());
  }
}
BENCHMARK(BM_Replicates)->Unit(benchmark::kMillisecond);

static void BM_CouplingW(benchmark::State& state) {
  const ModelParams p(2, 1000, 1.0);
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(size_biased_pair_W(p, s++).y_prime);
}
BENCHMARK(BM_CouplingW);
BENCHMARK_MAIN();
