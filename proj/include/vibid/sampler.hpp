#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vibid/denoiser.hpp"
#include "vibid/guidance.hpp"
#include "vibid/latent.hpp"
#include "vibid/rng.hpp"
#include "vibid/schedule.hpp"

namespace vibid {

enum class SamplerKind { kEuler, kFusion, kBidiVanilla, kVibidFull };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kVibidFull;
  KarrasParams schedule;
  double lambda = 0.5;
  GuidanceConfig guidance;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidParameter
};

/// Guidance defaults for each sampler kind: ViBiD uses CFG++ with one DDS
/// iteration, everything else plain CFG without DDS.
GuidanceConfig default_guidance(SamplerKind kind);

/// Model evaluations per sampling step, counting a batched cond/uncond pair once.
int nfe_per_step(SamplerKind kind);

struct StepRecord {
  int t = 0;
  double sigma = 0.0;
  double sigma_prev = 0.0;
  int nfe = 0;                    // cumulative after this step
  double offmanifold = -1.0;      // distance of x_{t-1} to the support; -1 when not measured
  std::vector<double> dds_forward;   // CG residual history, forward phase
  std::vector<double> dds_backward;  // CG residual history, backward phase
  std::optional<LatentVideo> state;  // x_{t-1}
};

struct TrajectoryRecord {
  std::vector<StepRecord> steps;
  int nfe = 0;
};

struct SampleOptions {
  bool keep_states = false;
  std::function<double(const LatentVideo&)> offmanifold;  // optional per-step metric
};

/// Receives the phase names of a step in execution order (test instrumentation).
using StepTrace = std::vector<std::string>;

LatentVideo euler_step(const LatentVideo& x_t, const LatentVideo& x0_hat, double sigma_t,
                       double sigma_prev);

/// x0_guided + (sigma_prev / sigma_t) (x_t - x0_uncond).
LatentVideo cfgpp_euler_step(const LatentVideo& x_t, const LatentVideo& x0_guided,
                             const LatentVideo& x0_uncond, double sigma_t, double sigma_prev);

/// x_prev + sqrt(sigma_t^2 - sigma_prev^2) * eps with fresh eps from `rng`.
LatentVideo renoise(const LatentVideo& x_prev, double sigma_t, double sigma_prev, NoiseStream& rng);

struct HalfStepResult {
  LatentVideo x_prev;
  std::vector<double> dds_residuals;
};

/// One conditioned denoise + (optional DDS toward `dds_target`) + CFG/CFG++ Euler update.
HalfStepResult guided_half_step(const LatentVideo& x_t, const DenoiserModel& model, const Frame& c,
                                const Frame& dds_target, double sigma_t, double sigma_prev,
                                const GuidanceConfig& guidance, StepTrace* trace = nullptr);

/// Time-reversal fusion: lambda * forward + (1 - lambda) * flip(backward on flip(x_t)).
LatentVideo fusion_step(const LatentVideo& x_t, const DenoiserModel& model, const Conditioning& cond,
                        double sigma_t, double sigma_prev, double lambda,
                        const GuidanceConfig& guidance, StepTrace* trace = nullptr);

struct BidiStepResult {
  LatentVideo x_prev;
  std::vector<double> dds_forward;
  std::vector<double> dds_backward;
};

/// Forward half-step on c_start, re-noise back to sigma_t, flip, backward
/// half-step on c_end, flip back.
BidiStepResult bidi_step(const LatentVideo& x_t, const DenoiserModel& model, const Conditioning& cond,
                         double sigma_t, double sigma_prev, const GuidanceConfig& guidance,
                         NoiseStream& rng, StepTrace* trace = nullptr);

struct SampleResult {
  LatentVideo sample;
  TrajectoryRecord trajectory;
};

SampleResult sample(const SamplerConfig& config, const DenoiserModel& model, const Conditioning& cond,
                    const SampleOptions& options = {});

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& s);  // euler|fusion|bidi|vibid
std::string to_string(GuidanceMode mode);
GuidanceMode guidance_mode_from_string(const std::string& s);  // cfg|cfgpp

}  // namespace vibid
