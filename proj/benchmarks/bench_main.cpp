#include <cmath>

#include <benchmark/benchmark.h>

#include "blindmatch/kernels.hpp"
#include "blindmatch/lap.hpp"
#include "blindmatch/qap.hpp"
#include "blindmatch/synthetic.hpp"

namespace {

using namespace blindmatch;

Matrix uniform(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, n);
  for (double& v : m.values()) v = rng.uniform(0.0, 1.0);
  return m;
}

FactorizedQap correlated_qap(int classes, std::uint64_t seed) {
  CorrelatedConfig cc;
  cc.classes = classes;
  cc.seed = seed;
  const auto d = make_correlated_modalities(cc);
  const auto px = class_prototypes(normalize_rows(d.x), 0.5, seed);
  const auto py = class_prototypes(normalize_rows(d.y), 0.5, seed);
  return to_qap(gw_kernel(px), gw_kernel(py), DistortionSpec::squared_diff());
}

void BM_LapJv(benchmark::State& state) {
  const Matrix c = uniform(static_cast<std::size_t>(state.range(0)), 1);
  LapWorkspace ws;
  LapSolution out;
  for (auto _ : state) {
    ws.solve_jv(c, out);
    benchmark::DoNotOptimize(out.objective);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LapJv)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_LapAuction(benchmark::State& state) {
  const Matrix c = uniform(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lap_auction(c, 1e-4).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LapAuction)->RangeMultiplier(2)->Range(8, 256)->Complexity();

// Ten dual-ascent iterations with convergence tests disabled.
void BM_HahnGrantTenIterations(benchmark::State& state) {
  const auto q = correlated_qap(static_cast<int>(state.range(0)), 3);
  HahnGrantConfig cfg;
  cfg.max_iters = 10;
  cfg.tol_abs = cfg.tol_rel = cfg.tol_gap = 1e-300;
  cfg.primal_heuristic_seeds = 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_factorized_hahn_grant(q, cfg).qap_dual);
  state.SetComplexityN(state.range(0));
}
// N^2 LAPs of size N per iteration.
BENCHMARK(BM_HahnGrantTenIterations)
    ->DenseRange(10, 40, 10)
    ->Unit(benchmark::kMillisecond)
    ->Complexity([](benchmark::IterationCount n) { return std::pow(static_cast<double>(n), 5.0); });

void BM_HahnGrantSolve(benchmark::State& state) {
  const auto q = correlated_qap(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_factorized_hahn_grant(q, HahnGrantConfig{}).qap_dual);
}
BENCHMARK(BM_HahnGrantSolve)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Faq(benchmark::State& state) {
  const auto q = correlated_qap(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_faq(q, 10, 0));
}
BENCHMARK(BM_Faq)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Enumeration(benchmark::State& state) {
  const auto q = correlated_qap(static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(solve_enumeration(q).qap_primal);
}
BENCHMARK(BM_Enumeration)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
