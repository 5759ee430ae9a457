// Serial reference vs OpenMP seed fan-out, plus the per-step kernels they share.

#include <benchmark/benchmark.h>

#include "vibid/config.hpp"
#include "vibid/harness.hpp"

namespace {

vibid::ExperimentConfig bench_config(vibid::ModelKind model, vibid::SamplerKind kind, int seeds) {
  auto cfg = vibid::default_config(model);
  cfg.sampler.kind = kind;
  cfg.sampler.guidance = vibid::default_guidance(kind);
  cfg.run.num_seeds = seeds;
  return cfg;
}

void BM_RunSeeds(benchmark::State& state, vibid::Execution exec, vibid::ModelKind model) {
  const auto cfg = bench_config(model, vibid::SamplerKind::kVibidFull, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vibid::run_seeds(cfg, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK_CAPTURE(BM_RunSeeds, ar1_serial, vibid::Execution::kSerial, vibid::ModelKind::kAr1)
    ->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunSeeds, ar1_parallel, vibid::Execution::kParallel, vibid::ModelKind::kAr1)
    ->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunSeeds, gmm_serial, vibid::Execution::kSerial, vibid::ModelKind::kGmm)
    ->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunSeeds, gmm_parallel, vibid::Execution::kParallel, vibid::ModelKind::kGmm)
    ->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BidiStep(benchmark::State& state) {
  const auto cfg = bench_config(vibid::ModelKind::kAr1, vibid::SamplerKind::kVibidFull, 1);
  const auto model = vibid::build_model(cfg.model);
  const auto cond = vibid::resolve_conditioning(cfg, model);
  vibid::NoiseStream init(0, 0, vibid::NoisePhase::kInitial);
  const auto x = init.normal_video(cfg.model.frames, cfg.model.dims);
  for (auto _ : state) {
    vibid::NoiseStream rng(0, 1, vibid::NoisePhase::kRenoise);
    benchmark::DoNotOptimize(
        vibid::bidi_step(x, vibid::as_denoiser(model), cond, 1.0, 0.8, cfg.sampler.guidance, rng));
  }
}
BENCHMARK(BM_BidiStep);

}  // namespace

BENCHMARK_MAIN();
