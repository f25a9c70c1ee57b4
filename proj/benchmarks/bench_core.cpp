#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <sticky/cluster_predictor.hpp>
#include <sticky/dynamics.hpp>
#include <sticky/ensemble.hpp>
#include <sticky/monotone.hpp>

namespace {

struct Scenario {
  std::vector<double> m, x, v;
};

Scenario random_scenario(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.5, 1.5), pos(-1.0, 1.0), vel(-1.0, 1.0);
  Scenario s;
  for (std::size_t i = 0; i < n; ++i) {
    s.m.push_back(mass(rng));
    s.x.push_back(pos(rng));
    s.v.push_back(vel(rng));
  }
  const double total = std::accumulate(s.m.begin(), s.m.end(), 0.0);
  for (double& w : s.m) w /= total;
  std::sort(s.x.begin(), s.x.end());
  return s;
}

void BM_drift(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = sticky::Kernel::power_law(1.0, 0.5, 1.0);
  const auto s = random_scenario(n, 1);
  const auto e = sticky::Ensemble::create(s.m, s.x, s.v, k);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::drift(e, k));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_drift)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_pava(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_scenario(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::pava(s.m, s.v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_pava)->RangeMultiplier(4)->Range(64, 65536)->Complexity(benchmark::oN);

void BM_analyze(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = sticky::Kernel::all_to_all(1.0);
  const auto s = random_scenario(n, 3);
  const auto e = sticky::Ensemble::create(s.m, s.x, s.v, k);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::analyze(e));
}
BENCHMARK(BM_analyze)->RangeMultiplier(4)->Range(64, 4096);

void BM_simulate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = sticky::Kernel::power_law(1.0, 0.5, 1.0);
  const auto s = random_scenario(n, 4);
  const auto e = sticky::Ensemble::create(s.m, s.x, s.v, k);
  for (auto _ : state) benchmark::DoNotOptimize(sticky::simulate(e, k, 5.0, 1.0));
}
BENCHMARK(BM_simulate)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
