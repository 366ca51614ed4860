#include "nlsv/eml.hpp"
#include "nlsv/forecasting.hpp"
#include "nlsv/likelihood.hpp"
#include "nlsv/simulation.hpp"

#include <benchmark/benchmark.h>

using namespace nlsv;

namespace {

const ObservedSeries& nl_series() {
  static const ObservedSeries s = simulate_series({4.6, 0.03}, reference_nl_parameters(),
                                                  ModelSpec::nl(), 500, "1990-01-02", 24,
                                                  RngStream(1, 0));
  return s;
}

}  // namespace

// One transition density at the default M and S.
static void BM_SmlTransition(benchmark::State& state) {
  const ParamVector t = reference_nl_parameters();
  const auto u = observed_log_states(nl_series(), t);
  LikelihoodConfig c;
  c.m = static_cast<int>(state.range(0));
  c.s = c.m * c.m;
  std::uint64_t k = 0;
  for (auto _ : state) {
    RngStream rng(c.seed, ++k);
    benchmark::DoNotOptimize(sml_transition_logdensity(u[10], u[11], t, ModelSpec::nl(), c, rng));
  }
}
BENCHMARK(BM_SmlTransition)->Arg(4)->Arg(12)->Arg(24)->Unit(benchmark::kMicrosecond);

// EML variance system over 500 observations.
static void BM_EmlAssembly(benchmark::State& state) {
  const ParamVector t = reference_nl_parameters();
  const auto u = observed_log_states(nl_series(), t);
  const auto iv = eml_intervals(u);
  EmlConfig c;
  c.m = static_cast<int>(state.range(0));
  c.n_bridges = static_cast<int>(state.range(1));
  const BasisTable table = variance_basis(t, ModelSpec::nl());
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_system(iv, table, c));
  }
}
BENCHMARK(BM_EmlAssembly)->Args({1, 1})->Args({8, 64})->Args({24, 576})->Unit(benchmark::kMillisecond);

// Full log-likelihood over 500 observations at a reduced budget.
static void BM_TotalLoglik(benchmark::State& state) {
  LikelihoodConfig c;
  c.m = 4;
  c.s = 16;
  c.n_bridges = 16;
  const ParamVector t = reference_nl_parameters();
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_loglik(nl_series(), t, ModelSpec::nl(), c));
  }
}
BENCHMARK(BM_TotalLoglik)->Unit(benchmark::kMillisecond);

// Hourly Euler paths over one trading quarter.
static void BM_SimulatePaths(benchmark::State& state) {
  const LogDynamics dyn(reference_nl_parameters(), ModelSpec::nl());
  const auto paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_paths({4.6, std::log(0.03) / dyn.params().sigma}, dyn, kHourlyStep, 66 * 8,
                       paths, RngStream(2, 0)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(paths) * 66 * 8);
}
BENCHMARK(BM_SimulatePaths)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

// Forecasts of all targets from one origin.
static void BM_ForecastTargets(benchmark::State& state) {
  const std::vector<int> horizons{1, 5, 22, 66, 131};
  ForecastOptions o;
  o.n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forecast_targets({4.6, 0.04}, reference_nl_parameters(),
                                              ModelSpec::nl(), horizons, o, RngStream(3, 0)));
  }
}
BENCHMARK(BM_ForecastTargets)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
