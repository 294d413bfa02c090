#include <benchmark/benchmark.h>

#include <numbers>

#include "abl/abl_rule.hpp"
#include "abl/counterfactual.hpp"
#include "abl/simulator.hpp"

namespace {

using namespace abl;

constexpr double kPi = std::numbers::pi;

PrePostContext spin_context() {
  return PrePostContext(spin_state(BlochDirection(0, 0)), spin_state(BlochDirection(kPi / 2, 0)));
}

void BM_AblDistributionSpin(benchmark::State& state) {
  const auto ctx = spin_context();
  const auto q = spin_observable(BlochDirection(kPi / 4, 0));
  for (auto _ : state) benchmark::DoNotOptimize(abl_distribution(ctx, q));
}
BENCHMARK(BM_AblDistributionSpin);

void BM_AblDistributionDim(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::vector<Complex> amps(dim, 1.0);
  const auto a = StateVector::normalized(amps);
  amps.back() = -1.0;
  const auto b = StateVector::normalized(amps);
  std::vector<std::size_t> half;
  for (std::size_t i = 0; i < dim / 2; ++i) half.push_back(i);
  const auto q = projector_observable(Projector::basis(dim, half), "half");
  const PrePostContext ctx(a, b);
  for (auto _ : state) benchmark::DoNotOptimize(abl_distribution(ctx, q));
}
BENCHMARK(BM_AblDistributionDim)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_SequenceDistribution(benchmark::State& state) {
  std::vector<Observable> obs;
  for (int k = 0; k < state.range(0); ++k) obs.push_back(spin_observable(BlochDirection(0.3 + 0.4 * k, 0.2 * k)));
  const MeasurementSequence seq(obs);
  const auto ctx = spin_context();
  for (auto _ : state) benchmark::DoNotOptimize(abl_sequence_distribution(ctx, seq));
}
BENCHMARK(BM_SequenceDistribution)->DenseRange(1, 6);

void BM_RunTrials(benchmark::State& state) {
  const auto ctx = spin_context();
  const MeasurementSequence seq({spin_observable(BlochDirection(kPi / 4, 0))});
  const auto final_obs = spin_observable(BlochDirection(kPi / 2, 0));
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_trials(ctx, seq, final_obs, trials, 42));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
}
BENCHMARK(BM_RunTrials)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_DiscrepancyScan(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(counterfactual::discrepancy_scan(steps));
}
BENCHMARK(BM_DiscrepancyScan)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
