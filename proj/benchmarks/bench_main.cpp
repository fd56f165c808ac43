#include <benchmark/benchmark.h>

#include <random>

#include "slowconv/adversary.hpp"
#include "slowconv/averaging.hpp"
#include "slowconv/towers.hpp"

using namespace slowconv;

namespace {

Obs random_obs(const SpacePtr& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(s->size());
  for (auto& x : v) x = u(rng);
  return Obs::from_values(s, std::move(v));
}

void BM_Cesaro(benchmark::State& state) {
  const auto t = cyclic_system(static_cast<std::size_t>(state.range(0)));
  const auto f = random_obs(t.space(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(cesaro(t, f, state.range(0) / 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Cesaro)->RangeMultiplier(16)->Range(1 << 12, 1 << 20);

void BM_PowerCombination(benchmark::State& state) {
  const auto t = odometer_system(2, 18);
  const auto f = random_obs(t.space(), 2);
  std::vector<std::pair<std::int64_t, double>> terms;
  for (std::int64_t k = 0; k < state.range(0); ++k) terms.emplace_back(3 * k - 7, 1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(power_combination(t, f, terms));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_PowerCombination)->Arg(1)->Arg(8)->Arg(64);

void BM_FlowUniformIntegers(benchmark::State& state) {
  const DiscreteFlow flow(cyclic_system(1 << 20), 1.0);
  const auto f = random_obs(flow.space(), 3);
  const auto nu = TimeMeasure::uniform_integers(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flow_measure_average(flow, nu, f));
}
BENCHMARK(BM_FlowUniformIntegers)->Arg(10)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GroupAverageBox(benchmark::State& state) {
  const auto a = torus_shift_action(2, 256, {{1, 0}, {0, 1}}, 4);
  const auto f = random_obs(a.space(), 4);
  const auto w = DiscreteWeights::uniform(box(2, state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_group_average(a, w, f));
}
BENCHMARK(BM_GroupAverageBox)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_CheckInvarianceFlow(benchmark::State& state) {
  const DiscreteFlow flow(cyclic_system(1 << 20), 1.0);
  const auto v = MSet::range(flow.space(), 0, 1 << 18);
  for (auto _ : state) benchmark::DoNotOptimize(check_invariance(flow, v, static_cast<double>(state.range(0)), 0.5));
}
BENCHMARK(BM_CheckInvarianceFlow)->Arg(10)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_CheckInvarianceTorus(benchmark::State& state) {
  const auto a = torus_shift_action(2, 256, {{1, 0}, {0, 1}}, 4);
  const auto window = box(2, state.range(0));
  const auto v = MSet::range(a.space(), 0, 1 << 14);
  for (auto _ : state) benchmark::DoNotOptimize(check_invariance(a, v, window, 0.5));
}
BENCHMARK(BM_CheckInvarianceTorus)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_BuildTowerSpread(benchmark::State& state) {
  const auto t = odometer_system(2, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_tower(t, static_cast<std::size_t>(state.range(0)), 0.3, {TowerLayout::spread, std::nullopt}));
  }
}
BENCHMARK(BM_BuildTowerSpread)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_TelescopeGap(benchmark::State& state) {
  const auto t = cyclic_system(1000);
  const auto f = random_obs(t.space(), 5);
  for (auto _ : state) benchmark::DoNotOptimize(telescope_gap(t, f, 37));
}
BENCHMARK(BM_TelescopeGap);

}  // namespace

BENCHMARK_MAIN();
