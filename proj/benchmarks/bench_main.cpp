#include <benchmark/benchmark.h>

#include "pspec/catalog.hpp"
#include "pspec/floquet.hpp"
#include "pspec/perturbation.hpp"
#include "pspec/truncation.hpp"
#include "pspec/weyl.hpp"

using namespace pspec;

static void BM_EssentialSpectrumLattice2(benchmark::State& state) {
  const auto g = make_lattice(2);
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(essential_spectrum(g, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid) * grid);
}
BENCHMARK(BM_EssentialSpectrumLattice2)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_SampleBandsG21(benchmark::State& state) {
  const auto g = make_g21_graph();
  for (auto _ : state) benchmark::DoNotOptimize(sample_bands(g, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SampleBandsG21)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_LambdaMembership(benchmark::State& state) {
  const auto p = make_random_pendant(0.1, 7).perturbed();
  std::int64_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lambda_contains(p, {Cell{x % 1000, x / 1000}, 0}));
    ++x;
  }
}
BENCHMARK(BM_LambdaMembership);

static void BM_ConditionPHalfPlane(benchmark::State& state) {
  const auto p = make_half_plane().perturbed();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_condition_P(p, n, Box{Cell{0, 0}, Cell{0, 2 * n}}));
}
BENCHMARK(BM_ConditionPHalfPlane)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_WeylResidualCone(benchmark::State& state) {
  const auto p = make_cone().perturbed();
  const auto located = locate_state(p.base(), 0.0);
  const int n = static_cast<int>(state.range(0));
  const Box window{Cell{0, 0}, Cell{2 * n, 2 * n}};
  for (auto _ : state) {
    const auto w = build_weyl_state(p, located, n, window);
    benchmark::DoNotOptimize(residual(p, w, 0.0));
  }
}
BENCHMARK(BM_WeylResidualCone)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_WrappedBoxSpectrum(benchmark::State& state) {
  const auto oracle = periodic_oracle(make_lattice(2));
  const std::int64_t n = state.range(0);
  const auto b = truncate(*oracle, Box{Cell{0, 0}, Cell{n - 1, n - 1}}, true);
  for (auto _ : state) benchmark::DoNotOptimize(spectrum_of_box(b));
}
BENCHMARK(BM_WrappedBoxSpectrum)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_MonteCarloWindow(benchmark::State& state) {
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_window_probability(1, 0.5, 1, samples));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloWindow)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
