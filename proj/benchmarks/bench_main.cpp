#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "scalespace/bifurcations.hpp"
#include "scalespace/contours.hpp"
#include "scalespace/kernels.hpp"
#include "scalespace/spectral.hpp"
#include "scalespace/trees.hpp"

using namespace scalespace;

static void BM_KernelProfile(benchmark::State& state) {
  double z = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_profile_even(z, 1.3));
    z = z > 30.0 ? 0.0 : z + 0.37;
  }
}
BENCHMARK(BM_KernelProfile);

static void BM_SynthField(benchmark::State& state) {
  const SignalGrid s = fixtures::signal(fixtures::kS3, static_cast<std::size_t>(state.range(0)), fixtures::kX0,
                                        40.0 / static_cast<double>(state.range(0)));
  const auto lad = fixtures::ladder();
  for (auto _ : state) benchmark::DoNotOptimize(synth_field(s, KernelParams{0.5, 1.0, 0.7}, 1, lad));
}
BENCHMARK(BM_SynthField)->Arg(1024)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

static void BM_ExtractLevelSet(benchmark::State& state) {
  const FieldGrid f = synth_field(fixtures::signal(fixtures::kS3), KernelParams::even(1.5), 1, fixtures::ladder());
  for (auto _ : state) benchmark::DoNotOptimize(extract_level_set(f, 0.0));
}
BENCHMARK(BM_ExtractLevelSet)->Unit(benchmark::kMicrosecond);

static void BM_BuildTree(benchmark::State& state) {
  const FieldGrid f = synth_field(fixtures::signal(fixtures::kS3), KernelParams::even(1.5), 1, fixtures::ladder());
  const ContourSet set = extract_level_set(f, 0.0);
  TreeOptions opt;
  opt.tolerate_truncated = true;
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(build_tree(set, opt), false));
}
BENCHMARK(BM_BuildTree)->Unit(benchmark::kMicrosecond);

static void BM_ScanP(benchmark::State& state) {
  const SignalGrid s = fixtures::signal(fixtures::kS2);
  ParamScan cfg;
  cfg.lo = 0.0;
  cfg.hi = 3.0;
  cfg.sigma_grid = fixtures::ladder();
  cfg.c = -0.88 * synth_field(s, KernelParams::even(0.0), 1, cfg.sigma_grid).scale();
  for (auto _ : state) benchmark::DoNotOptimize(scan(s, cfg));
}
BENCHMARK(BM_ScanP)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
