// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>

#include "benchoracle/cf_engine.hpp"
#include "benchoracle/evaluation.hpp"
#include "benchoracle/kernels.hpp"

using namespace benchoracle;

namespace {

struct Fixture {
  BenchmarkMatrix matrix;
  FactorModel model;
  std::vector<Observation> observations;
};

const Fixture& fixture(std::size_t m, std::size_t n) {
  static std::map<std::pair<std::size_t, std::size_t>, Fixture> cache;
  auto it = cache.find({m, n});
  if (it == cache.end()) {
    Hyperparams p;
    Fixture f{generate_synthetic(m, n, std::min<std::size_t>(10, std::min(m, n)), 0.0, 1),
              init_factors(m, n, p), {}};
    f.observations = f.matrix.observations();
    it = cache.emplace(std::pair{m, n}, std::move(f)).first;
  }
  return it->second;
}

template <auto Objective>
void BM_objective(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(Objective(f.observations, f.model, 5e-6));
  state.SetItemsProcessed(state.iterations() * f.observations.size());
}

template <auto Reconstruct>
void BM_reconstruct(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(Reconstruct(f.model));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void BM_experiment(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.dataset = generate_synthetic(42, 192, 10, 0.0, 1);
  cfg.missing_fractions = {0.3, 0.6, 0.9};
  cfg.replications = 2;
  cfg.hyperparams.epochs = 100;
  cfg.record_timing = false;
  cfg.execution = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}

}  // namespace

BENCHMARK(BM_objective<kernels::serial::objective>)->Args({42, 192})->Args({500, 2000});
BENCHMARK(BM_objective<kernels::parallel::objective>)->Args({42, 192})->Args({500, 2000});
BENCHMARK(BM_reconstruct<kernels::serial::reconstruct>)->Args({42, 192})->Args({500, 2000});
BENCHMARK(BM_reconstruct<kernels::parallel::reconstruct>)->Args({42, 192})->Args({500, 2000});
BENCHMARK(BM_experiment)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
