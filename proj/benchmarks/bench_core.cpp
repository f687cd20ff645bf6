#include <benchmark/benchmark.h>

#include "qneq/analysis.hpp"
#include "qneq/relaxation.hpp"
#include "qneq/statistics.hpp"

using namespace qneq;

static void BM_Philox(benchmark::State& state) {
  const CounterRng rng(7, 1);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform2(i++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

static void BM_ExactProbPlus(benchmark::State& state) {
  const ModelSpec model(UnitAxis({1, 0, 0}), 0.7);
  const LambdaDensity d(0.6, SignDensity(shape::Histogram{{-1, -0.2, 0.5, 1}, {1, 2, 1}}),
                        SignDensity(shape::PiecewiseLinear{{-1, 0, 1}, {0.2, 1, 0.4}}));
  double theta = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_prob_plus(polariser_axis(theta), d, model));
    theta += 1e-3;
  }
}
BENCHMARK(BM_ExactProbPlus);

static void BM_TallyProtocol(benchmark::State& state) {
  const ModelSpec model(UnitAxis({1, 0, 0}), 0.8);
  const auto d = LambdaDensity::equilibrium(model);
  const auto photons = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tally_protocol(model, d, {ProtocolMode::RandomReset, uniform_angle_grid(12), photons, 1}, 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TallyProtocol)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_FitHarmonics(benchmark::State& state) {
  const ModelSpec model(UnitAxis({1, 0, 0}), 0.8);
  const auto table = tabulate(tally_protocol(model, LambdaDensity::equilibrium(model),
                                             {ProtocolMode::RandomReset, uniform_angle_grid(24), 240000, 3}));
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_harmonics(table, order));
}
BENCHMARK(BM_FitHarmonics)->Arg(1)->Arg(3)->Arg(8);

static void BM_ChiSquareSf(benchmark::State& state) {
  double x = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::chi_square_sf(x, 9));
    x = x > 60 ? 0.5 : x + 0.37;
  }
}
BENCHMARK(BM_ChiSquareSf);

static void BM_GuidanceVelocity(benchmark::State& state) {
  const auto s = BoxState::equal_amplitudes(static_cast<std::size_t>(state.range(0)), 1);
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(guidance_velocity(s, x, 0.3));
    x = x > 0.98 ? 0.01 : x + 0.0137;
  }
}
BENCHMARK(BM_GuidanceVelocity)->Arg(4)->Arg(16);

static void BM_EvolveTrajectory(benchmark::State& state) {
  const auto s = BoxState::equal_amplitudes(4, 1);
  const TrajectoryEnsemble e{sample_uniform(16, 2), 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(evolve(e, s, 1.0, 1e-7, 1));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_EvolveTrajectory)->Unit(benchmark::kMillisecond);

static void BM_FlowMapEval(benchmark::State& state) {
  const auto s = BoxState::equal_amplitudes(4, 1);
  const FlowMap flow(s, 1.0, 256, 1e-9);
  double x = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow(x));
    x = x > 0.99 ? 0.001 : x + 0.00731;
  }
}
BENCHMARK(BM_FlowMapEval);

static void BM_SampleBorn(benchmark::State& state) {
  const auto s = BoxState::equal_amplitudes(4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_born(s, 0.2, 10000, 3));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SampleBorn)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
