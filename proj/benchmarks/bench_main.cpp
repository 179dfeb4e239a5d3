#include "kolmo/gaussian_kernel.hpp"
#include "kolmo/grid_field.hpp"

#include <benchmark/benchmark.h>

using namespace kolmo;

static void BM_Covariance(benchmark::State& state) {
  ChainParams p(static_cast<int>(state.range(0)), 1, 2.0);
  auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(covariance(p, prof, 0.0, 1.5));
}
BENCHMARK(BM_Covariance)->Arg(2)->Arg(3)->Arg(4);

static void BM_Transform(benchmark::State& state) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, 4.0, static_cast<int>(state.range(0)));
  GridField f = random_bandlimited(g, 1, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(inverse_transform(transform(f)));
}
BENCHMARK(BM_Transform)->Arg(64)->Arg(256);

static void BM_ShearSpectral(benchmark::State& state) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, 4.0, static_cast<int>(state.range(0)));
  GridField f = random_bandlimited(g, 1, 0.25);
  BlockMatrix m = mat_exp(p, 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(shear_resample(f, m, ShearMethod::spectral_translation));
}
BENCHMARK(BM_ShearSpectral)->Arg(64)->Arg(256);

static void BM_ShearSpline(benchmark::State& state) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, 4.0, static_cast<int>(state.range(0)));
  GridField f = random_bandlimited(g, 1, 0.25);
  BlockMatrix m = mat_exp(p, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(shear_resample(f, m, ShearMethod::cubic_spline));
}
BENCHMARK(BM_ShearSpline)->Arg(64)->Arg(256);
BENCHMARK_MAIN();
