// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "cbeal/theory.hpp"

namespace {

using cbeal::theory::TheoryParams;

TheoryParams params(double d) {
  TheoryParams p;
  p.center_dist_sq = d;
  p.draws = 4000;
  return p;
}

void BM_McLdSerial(benchmark::State& state) {
  const auto p = params(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(cbeal::theory::mc_ld_acquisition(p, false));
}
BENCHMARK(BM_McLdSerial)->Unit(benchmark::kMillisecond);

void BM_McLdParallel(benchmark::State& state) {
  const auto p = params(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(cbeal::theory::mc_ld_acquisition(p, true));
}
BENCHMARK(BM_McLdParallel)->Unit(benchmark::kMillisecond);

void BM_QuadratureSerial(benchmark::State& state) {
  const auto p = params(10.0);
  cbeal::theory::QuadratureOptions o;
  o.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(cbeal::theory::expected_ld_acquisition(p, o));
}
BENCHMARK(BM_QuadratureSerial)->Unit(benchmark::kMicrosecond);

void BM_QuadratureParallel(benchmark::State& state) {
  const auto p = params(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(cbeal::theory::expected_ld_acquisition(p));
}
BENCHMARK(BM_QuadratureParallel)->Unit(benchmark::kMicrosecond);

void BM_RalSweep(benchmark::State& state) {
  const auto p = params(0.0);
  cbeal::theory::RalSweepConfig c;
  c.pool_resamples = 32;
  c.draws_per_pool = 100;
  const bool parallel = state.range(0) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(cbeal::theory::mc_ral_nonconvergence(p, {0.0, 25.0}, c, parallel));
}
BENCHMARK(BM_RalSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
