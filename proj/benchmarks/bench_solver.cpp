#include <benchmark/benchmark.h>

#include "vqt/simulator.hpp"
#include "vqt/solver.hpp"

namespace {

vqt::QueueParams params_for(int c) {
  return vqt::validate_params(c, 0.7 * c * 0.9, 0.8, 0.9, 2.0);
}

void BM_Solve(benchmark::State& state) {
  const vqt::QueueParams p = params_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vqt::solve(p));
}
BENCHMARK(BM_Solve)->DenseRange(1, 8);

void BM_EvalCdfGrid(benchmark::State& state) {
  const vqt::StationarySolution s = vqt::solve(params_for(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 400; ++i) acc += vqt::eval_cdf(s, 20.0 * i / 399.0).total;
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 400);
}
BENCHMARK(BM_EvalCdfGrid)->Arg(2)->Arg(4)->Arg(8);

void BM_MeanWait(benchmark::State& state) {
  const vqt::StationarySolution s = vqt::solve(params_for(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(vqt::mean_wait(s));
}
BENCHMARK(BM_MeanWait)->Arg(2)->Arg(8);

void BM_Simulate(benchmark::State& state) {
  const vqt::QueueParams p = vqt::validate_params(3, 2.0, 0.8, 0.7, 5.0);
  vqt::SimConfig cfg;
  cfg.num_arrivals = static_cast<std::uint64_t>(state.range(0));
  cfg.grid = {1.0, 5.0, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(vqt::simulate(p, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
