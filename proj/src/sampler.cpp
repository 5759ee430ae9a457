#include "vibid/sampler.hpp"

#include <cmath>
#include <string>

#include "vibid/errors.hpp"

namespace vibid {

void SamplerConfig::validate() const {
  if (schedule.steps < 1) throw InvalidParameter("steps must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda must lie in [0, 1]");
  guidance.validate();
  if (kind == SamplerKind::kBidiVanilla &&
      (guidance.mode != GuidanceMode::kCfg || guidance.dds_enabled))
    throw InvalidParameter("the vanilla bidirectional sampler uses plain CFG without DDS; use 'vibid' instead");
  // Surfaces bad schedule bounds before any sampling work starts.
  (void)karras_schedule(schedule);
}

GuidanceConfig default_guidance(SamplerKind kind) {
  GuidanceConfig g;
  if (kind == SamplerKind::kVibidFull) {
    g.mode = GuidanceMode::kCfgPlusPlus;
    g.dds_enabled = true;
    g.dds_iters = 1;
  }
  return g;
}

int nfe_per_step(SamplerKind kind) { return kind == SamplerKind::kEuler ? 1 : 2; }

namespace {

void check_step(double sigma_t, double sigma_prev) {
  if (!(sigma_t > 0.0)) throw InvalidParameter("Euler step: sigma_t must be > 0");
  if (!(sigma_prev >= 0.0 && sigma_prev <= sigma_t))
    throw InvalidParameter("Euler step: need 0 <= sigma_prev <= sigma_t");
}

void note(StepTrace* trace, const char* what) {
  if (trace) trace->emplace_back(what);
}

}  // namespace

LatentVideo euler_step(const LatentVideo& x_t, const LatentVideo& x0_hat, double sigma_t, double sigma_prev) {
  check_step(sigma_t, sigma_prev);
  if (sigma_prev == sigma_t && x_t.same_shape(x0_hat)) return x_t;
  return cfgpp_euler_step(x_t, x0_hat, x0_hat, sigma_t, sigma_prev);
}

LatentVideo cfgpp_euler_step(const LatentVideo& x_t, const LatentVideo& x0_guided, const LatentVideo& x0_uncond,
                             double sigma_t, double sigma_prev) {
  check_step(sigma_t, sigma_prev);
  if (!x_t.same_shape(x0_guided) || !x_t.same_shape(x0_uncond))
    throw ShapeMismatch("Euler step: shape mismatch");
  if (sigma_prev == 0.0) return x0_guided;
  const double ratio = sigma_prev / sigma_t;
  LatentVideo out(x_t.frames(), x_t.dims());
  auto x = x_t.flat(), g = x0_guided.flat(), u = x0_uncond.flat();
  auto o = out.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = g[i] + ratio * (x[i] - u[i]);
  return out;
}

LatentVideo renoise(const LatentVideo& x_prev, double sigma_t, double sigma_prev, NoiseStream& rng) {
  if (!(sigma_prev >= 0.0)) throw InvalidParameter("renoise: sigma_prev must be >= 0");
  const double radicand = sigma_t * sigma_t - sigma_prev * sigma_prev;
  if (!(radicand >= 0.0)) throw InvalidParameter("renoise: sigma_t must be >= sigma_prev");
  if (radicand == 0.0) return x_prev;
  const double amount = std::sqrt(radicand);
  LatentVideo out = x_prev;
  for (double& v : out.flat()) v += amount * rng.normal();
  return out;
}

HalfStepResult guided_half_step(const LatentVideo& x_t, const DenoiserModel& model, const Frame& c,
                                const Frame& dds_target, double sigma_t, double sigma_prev,
                                const GuidanceConfig& guidance, StepTrace* trace) {
  HalfStepResult res;
  DenoisedPair est = model.denoise(x_t, sigma_t, c);
  note(trace, "denoise");
  LatentVideo guided = cfg_combine(est.cond, est.uncond, guidance.scale);
  if (guidance.dds_enabled) {
    guided = dds_guide(guided, dds_target, guidance.dds_iters, &res.dds_residuals);
    note(trace, "dds");
  }
  if (guidance.mode == GuidanceMode::kCfg) {
    res.x_prev = euler_step(x_t, guided, sigma_t, sigma_prev);
  } else {
    res.x_prev = cfgpp_euler_step(x_t, guided, est.uncond, sigma_t, sigma_prev);
  }
  note(trace, "update");
  return res;
}

LatentVideo fusion_step(const LatentVideo& x_t, const DenoiserModel& model, const Conditioning& cond,
                        double sigma_t, double sigma_prev, double lambda, const GuidanceConfig& guidance,
                        StepTrace* trace) {
  HalfStepResult fwd = guided_half_step(x_t, model, cond.start, cond.end, sigma_t, sigma_prev, guidance, trace);
  const LatentVideo x_rev = flip(x_t);
  note(trace, "flip");
  HalfStepResult bwd = guided_half_step(x_rev, model, cond.end, cond.start, sigma_t, sigma_prev, guidance, trace);
  LatentVideo out = lerp(fwd.x_prev, flip(bwd.x_prev), lambda);
  note(trace, "fuse");
  return out;
}

BidiStepResult bidi_step(const LatentVideo& x_t, const DenoiserModel& model, const Conditioning& cond,
                         double sigma_t, double sigma_prev, const GuidanceConfig& guidance, NoiseStream& rng,
                         StepTrace* trace) {
  BidiStepResult res;
  HalfStepResult fwd = guided_half_step(x_t, model, cond.start, cond.end, sigma_t, sigma_prev, guidance, trace);
  res.dds_forward = std::move(fwd.dds_residuals);
  LatentVideo x_back_up = renoise(fwd.x_prev, sigma_t, sigma_prev, rng);
  note(trace, "renoise");
  const LatentVideo x_rev = flip(x_back_up);
  note(trace, "flip");
  HalfStepResult bwd = guided_half_step(x_rev, model, cond.end, cond.start, sigma_t, sigma_prev, guidance, trace);
  res.dds_backward = std::move(bwd.dds_residuals);
  res.x_prev = flip(bwd.x_prev);
  note(trace, "flip");
  return res;
}

SampleResult sample(const SamplerConfig& config, const DenoiserModel& model, const Conditioning& cond,
                    const SampleOptions& options) {
  config.validate();
  const std::size_t F = model.frames(), D = model.dims();
  if (F < 2) throw InvalidParameter("sample: model must have at least two frames");
  if (cond.start.dims() != D || cond.end.dims() != D)
    throw ShapeMismatch("sample: conditioning frames must have the model's latent dimension");

  const SigmaSchedule sigmas = karras_schedule(config.schedule);
  const int T = sigmas.steps();

  SampleResult out;
  NoiseStream init(config.seed, static_cast<std::uint64_t>(T), NoisePhase::kInitial);
  LatentVideo x = sigmas.max() * init.normal_video(F, D);
  out.trajectory.steps.reserve(static_cast<std::size_t>(T));

  for (int t = T; t >= 1; --t) {
    const double s_t = sigmas[t];
    const double s_prev = sigmas[t - 1];
    StepRecord rec;
    rec.t = t;
    rec.sigma = s_t;
    rec.sigma_prev = s_prev;
    switch (config.kind) {
      case SamplerKind::kEuler: {
        HalfStepResult h = guided_half_step(x, model, cond.start, cond.end, s_t, s_prev, config.guidance);
        x = std::move(h.x_prev);
        rec.dds_forward = std::move(h.dds_residuals);
        break;
      }
      case SamplerKind::kFusion:
        x = fusion_step(x, model, cond, s_t, s_prev, config.lambda, config.guidance);
        break;
      case SamplerKind::kBidiVanilla:
      case SamplerKind::kVibidFull: {
        NoiseStream rng(config.seed, static_cast<std::uint64_t>(t), NoisePhase::kRenoise);
        BidiStepResult b = bidi_step(x, model, cond, s_t, s_prev, config.guidance, rng);
        x = std::move(b.x_prev);
        rec.dds_forward = std::move(b.dds_forward);
        rec.dds_backward = std::move(b.dds_backward);
        break;
      }
    }
    out.trajectory.nfe += nfe_per_step(config.kind);
    rec.nfe = out.trajectory.nfe;
    if (options.offmanifold) rec.offmanifold = options.offmanifold(x);
    if (options.keep_states) rec.state = x;
    out.trajectory.steps.push_back(std::move(rec));
  }
  if (!x.all_finite()) throw NumericalError("sample: non-finite values in the final sample");
  out.sample = std::move(x);
  return out;
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kEuler: return "euler";
    case SamplerKind::kFusion: return "fusion";
    case SamplerKind::kBidiVanilla: return "bidi";
    case SamplerKind::kVibidFull: return "vibid";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "euler") return SamplerKind::kEuler;
  if (s == "fusion") return SamplerKind::kFusion;
  if (s == "bidi") return SamplerKind::kBidiVanilla;
  if (s == "vibid") return SamplerKind::kVibidFull;
  throw InvalidParameter("unknown sampler '" + s + "' (expected euler|fusion|bidi|vibid)");
}

std::string to_string(GuidanceMode mode) { return mode == GuidanceMode::kCfg ? "cfg" : "cfgpp"; }

GuidanceMode guidance_mode_from_string(const std::string& s) {
  if (s == "cfg") return GuidanceMode::kCfg;
  if (s == "cfgpp") return GuidanceMode::kCfgPlusPlus;
  throw InvalidParameter("unknown guidance mode '" + s + "' (expected cfg|cfgpp)");
}

}  // namespace vibid
