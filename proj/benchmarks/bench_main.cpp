#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dynamics.hpp"
#include "pointerlab/macro_observables.hpp"

using namespace pointerlab;

namespace {

StateVector start_state(const ModelSpec& spec) {
  const double r = 1.0 / std::numbers::sqrt2;
  return initial_state(spec, Complex{r}, Complex{r});
}

void BM_Matvec(benchmark::State& state) {
  const auto spec = ModelSpec::disordered(static_cast<int>(state.range(0)), 1);
  const HamiltonianOperator h(spec);
  const StateVector s = start_state(spec);
  std::vector<Complex> out(s.size());
  for (auto _ : state) {
    h.apply(s.amplitudes(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.size()));
}
BENCHMARK(BM_Matvec)->DenseRange(8, 14, 2);

// One sampling step of a long trajectory.
void BM_KrylovStep(benchmark::State& state) {
  const auto spec = ModelSpec::disordered(static_cast<int>(state.range(0)), 1);
  const HamiltonianOperator h(spec);
  EvolutionConfig cfg;
  cfg.krylov_dim = static_cast<int>(state.range(1));
  const Propagator prop(h, cfg);
  StateVector s = start_state(spec);
  long matvecs = 0;
  for (auto _ : state) {
    s = prop.advance(s, 0.5, 2000.0);
    matvecs += prop.last_matvecs();
  }
  state.counters["matvecs/step"] =
      benchmark::Counter(static_cast<double>(matvecs) / static_cast<double>(state.iterations()));
}
BENCHMARK(BM_KrylovStep)
    ->ArgsProduct({{10, 12, 14}, {16, 24}})
    ->Unit(benchmark::kMillisecond);

void BM_PointerExpectation(benchmark::State& state) {
  const auto spec = ModelSpec::disordered(static_cast<int>(state.range(0)), 1);
  const StateVector s = evolve(HamiltonianOperator(spec), start_state(spec), 3.0, EvolutionConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(pointer_expectation(s));
}
BENCHMARK(BM_PointerExpectation)->DenseRange(8, 14, 2);

void BM_ThresholdProbability(benchmark::State& state) {
  const auto spec = ModelSpec::disordered(static_cast<int>(state.range(0)), 1);
  const StateVector s = evolve(HamiltonianOperator(spec), start_state(spec), 3.0, EvolutionConfig{});
  const PointerObservable obs(spec.n);
  for (auto _ : state) benchmark::DoNotOptimize(obs.threshold_probability(s));
}
BENCHMARK(BM_ThresholdProbability)->DenseRange(8, 14, 2);

}  // namespace

BENCHMARK_MAIN();
