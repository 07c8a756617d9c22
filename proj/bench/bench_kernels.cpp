// Serial reference vs OpenMP kernels. Run with e.g.
//   OMP_NUM_THREADS=4 ./evprice_bench

#include <benchmark/benchmark.h>

#include "evprice/demand.hpp"
#include "evprice/harness.hpp"
#include "evprice/value_iteration.hpp"

using namespace evprice;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_McErrorOracle(benchmark::State& state) {
  for (auto _ : state) {
    Rng rng = make_rng(7);
    benchmark::DoNotOptimize(mc_error_oracle(192, 24.0, 200'000, rng, mode(state)));
  }
  label(state);
}
BENCHMARK(BM_McErrorOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ValueIteration(benchmark::State& state) {
  InstanceConfig cfg;
  cfg.slots = SlotGrid(4, 6.0);
  cfg.timesteps = 96;
  const TransitionModel model = TransitionModel::from_instance(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(model, 50'000'000, mode(state)));
  label(state);
}
BENCHMARK(BM_ValueIteration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RunExperiment(benchmark::State& state) {
  ExperimentSpec spec;
  spec.pricers = {"oracle", "mcts", "flatrate"};
  spec.replications = 16;
  spec.flatrate_training = 16;
  spec.mcts = MctsParams::light();
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(spec, mode(state)));
  label(state);
}
BENCHMARK(BM_RunExperiment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
