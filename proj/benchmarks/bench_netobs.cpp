#include <benchmark/benchmark.h>

#include "netobs/montecarlo.hpp"
#include "netobs/oracles.hpp"
#include "netobs/solver.hpp"
#include "netobs/spectrum.hpp"
#include "netobs/validation.hpp"

using namespace netobs;

namespace {

void BM_FixedLambdaLine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Sample s = sample_network(Topology::kLine, n, trial_seed(7, n, 0));
  for (auto _ : state) {
    const FixedLambdaResult r = solve_fixed_lambda(s.net, s.mask, Complex(0.0, 1.0), SolverConfig{});
    benchmark::DoNotOptimize(r.cost);
  }
}
BENCHMARK(BM_FixedLambdaLine)->Arg(3)->Arg(5)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_InverseIterationLine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Sample s = sample_network(Topology::kLine, n, trial_seed(7, n, 0));
  SolverConfig cfg;
  cfg.method = Method::kInverseIteration;
  for (auto _ : state) {
    const FixedLambdaResult r = solve_fixed_lambda(s.net, s.mask, Complex(0.0, 1.0), cfg);
    benchmark::DoNotOptimize(r.cost);
  }
}
BENCHMARK(BM_InverseIterationLine)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_RadiusSearch(benchmark::State& state) {
  const Topology top = state.range(0) == 0 ? Topology::kLine : Topology::kStar;
  const int n = static_cast<int>(state.range(1));
  const Sample s = sample_network(top, n, trial_seed(11, n, 0));
  const GridSpec g = GridSpec::parse(top == Topology::kLine ? "line" : "star");
  for (auto _ : state) {
    const RadiusResult r = solve_radius(s.net, s.mask, g, SolverConfig{});
    benchmark::DoNotOptimize(r.best.cost);
  }
}
BENCHMARK(BM_RadiusSearch)->Args({0, 4})->Args({0, 8})->Args({1, 4})->Args({1, 8})->Unit(benchmark::kMillisecond);

void BM_PencilSpectrum(benchmark::State& state) {
  std::vector<PencilPair> pencils;
  for (int i = 0; i < 32; ++i) pencils.push_back(random_pencil_case(3, i).pencil);
  for (auto _ : state)
    for (const PencilPair& pp : pencils) {
      const PencilSpectrum sp = generalized_spectrum(pp);
      benchmark::DoNotOptimize(sp.eigenvalues.data());
    }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pencils.size()));
}
BENCHMARK(BM_PencilSpectrum)->Unit(benchmark::kMicrosecond);

void BM_QzCrossCheck(benchmark::State& state) {
  std::vector<PencilPair> pencils;
  for (int i = 0; i < 32; ++i) pencils.push_back(random_pencil_case(3, i).pencil);
  for (auto _ : state)
    for (const PencilPair& pp : pencils) benchmark::DoNotOptimize(qz_finite_eigenvalues(pp).size());
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pencils.size()));
}
BENCHMARK(BM_QzCrossCheck)->Unit(benchmark::kMicrosecond);

void BM_OracleEnsemble(benchmark::State& state) {
  EnsembleSpec spec;
  spec.topology = state.range(0) == 0 ? Topology::kLine : Topology::kStar;
  spec.sizes = {40};
  spec.trials = 1000;
  for (auto _ : state) {
    const EnsembleResult r = estimate_expected_radius(spec, EstimateMethod::kOracle);
    benchmark::DoNotOptimize(r.sizes.front().mean);
  }
}
BENCHMARK(BM_OracleEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Line3Roots(benchmark::State& state) {
  const Sample s = sample_network(Topology::kLine, 3, trial_seed(5, 3, 0));
  for (auto _ : state) benchmark::DoNotOptimize(line3_optimal(s.net.weights(), Complex(0.0, 1.0)).best.delta);
}
BENCHMARK(BM_Line3Roots);

}  // namespace

BENCHMARK_MAIN();
