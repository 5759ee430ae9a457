#include "vibid/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "vibid/errors.hpp"

namespace vibid {

using nlohmann::json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPoint: return "point";
    case ModelKind::kGauss: return "gauss";
    case ModelKind::kAr1: return "ar1";
    case ModelKind::kSubspace: return "subspace";
    case ModelKind::kGmm: return "gmm";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "point") return ModelKind::kPoint;
  if (s == "gauss") return ModelKind::kGauss;
  if (s == "ar1") return ModelKind::kAr1;
  if (s == "subspace") return ModelKind::kSubspace;
  if (s == "gmm") return ModelKind::kGmm;
  throw InvalidParameter("unknown model '" + s + "' (expected point|gauss|ar1|subspace|gmm)");
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, const std::string& path) {
  if (v.empty()) return std::vector<double>(n, 0.0);
  if (v.size() == 1) return std::vector<double>(n, v.front());
  if (v.size() != n)
    throw ConfigError(path, "expected 1 or " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  return v;
}

// ---------------------------------------------------------------------------
// Strict JSON reading

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw ConfigError(join(path, k), "unknown key");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long long>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& path) {
  if (j.is_number()) return {get_number(j, path)};
  if (!j.is_array()) throw ConfigError(path, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename Fn>
auto as_config_error(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidParameter& e) {
    throw ConfigError(path, e.what());
  }
}

ModelSpec parse_model(const json& j) {
  const std::string path = "model";
  require_object(j, path);
  if (!j.contains("kind")) throw ConfigError("model.kind", "missing");
  ModelSpec m;
  m.kind = as_config_error("model.kind", [&] { return model_kind_from_string(get_string(j["kind"], "model.kind")); });
  switch (m.kind) {
    case ModelKind::kPoint: check_keys(j, path, {"kind", "frames", "dims", "value"}); break;
    case ModelKind::kGauss: check_keys(j, path, {"kind", "frames", "dims", "mean", "tau"}); break;
    case ModelKind::kAr1: check_keys(j, path, {"kind", "frames", "dims", "mean", "tau", "phi"}); break;
    case ModelKind::kSubspace:
      check_keys(j, path, {"kind", "frames", "dims", "mean", "tau", "rank", "basis"});
      break;
    case ModelKind::kGmm: check_keys(j, path, {"kind", "frames", "dims", "components"}); break;
  }
  if (j.contains("frames")) {
    const auto f = get_integer(j["frames"], "model.frames");
    if (f < 3) throw ConfigError("model.frames", "must be >= 3");
    m.frames = static_cast<std::size_t>(f);
  }
  if (j.contains("dims")) {
    const auto d = get_integer(j["dims"], "model.dims");
    if (d < 1) throw ConfigError("model.dims", "must be >= 1");
    m.dims = static_cast<std::size_t>(d);
  }
  if (j.contains("mean")) m.mean = get_vector(j["mean"], "model.mean");
  if (j.contains("tau")) m.tau = get_number(j["tau"], "model.tau");
  if (j.contains("phi")) m.phi = get_number(j["phi"], "model.phi");
  if (j.contains("value")) m.value = get_vector(j["value"], "model.value");
  if (j.contains("rank")) m.rank = static_cast<int>(get_integer(j["rank"], "model.rank"));
  if (j.contains("basis")) {
    if (!j["basis"].is_array()) throw ConfigError("model.basis", "expected an array of vectors");
    for (std::size_t i = 0; i < j["basis"].size(); ++i)
      m.basis.push_back(get_vector(j["basis"][i], "model.basis[" + std::to_string(i) + "]"));
    if (!j.contains("rank")) m.rank = static_cast<int>(m.basis.size());
  }
  if (j.contains("components")) {
    const json& cs = j["components"];
    if (!cs.is_array()) throw ConfigError("model.components", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string p = "model.components[" + std::to_string(i) + "]";
      require_object(cs[i], p);
      check_keys(cs[i], p, {"weight", "mean", "variance"});
      GmmComponentSpec c;
      if (cs[i].contains("weight")) c.weight = get_number(cs[i]["weight"], p + ".weight");
      if (cs[i].contains("mean")) c.mean = get_vector(cs[i]["mean"], p + ".mean");
      if (cs[i].contains("variance")) c.variance = get_number(cs[i]["variance"], p + ".variance");
      m.components.push_back(std::move(c));
    }
  }
  return m;
}

ConditioningSpec parse_conditioning(const json& j) {
  require_object(j, "conditioning");
  check_keys(j, "conditioning", {"start", "end", "metadata"});
  ConditioningSpec c;
  if (j.contains("start")) c.start = get_vector(j["start"], "conditioning.start");
  if (j.contains("end")) c.end = get_vector(j["end"], "conditioning.end");
  if (j.contains("metadata")) {
    require_object(j["metadata"], "conditioning.metadata");
    for (const auto& [k, v] : j["metadata"].items()) {
      if (v.is_string()) c.metadata[k] = v.get<std::string>();
      else if (v.is_number() || v.is_boolean()) c.metadata[k] = v.dump();
      else throw ConfigError("conditioning.metadata." + k, "expected a string, number or boolean");
    }
  }
  return c;
}

void parse_sampler(const json& j, SamplerConfig& s) {
  require_object(j, "sampler");
  check_keys(j, "sampler", {"kind", "steps", "sigma_min", "sigma_max", "rho", "lambda"});
  if (j.contains("kind"))
    s.kind = as_config_error("sampler.kind", [&] { return sampler_kind_from_string(get_string(j["kind"], "sampler.kind")); });
  if (j.contains("steps")) s.schedule.steps = static_cast<int>(get_integer(j["steps"], "sampler.steps"));
  if (j.contains("sigma_min")) s.schedule.sigma_min = get_number(j["sigma_min"], "sampler.sigma_min");
  if (j.contains("sigma_max")) s.schedule.sigma_max = get_number(j["sigma_max"], "sampler.sigma_max");
  if (j.contains("rho")) s.schedule.rho = get_number(j["rho"], "sampler.rho");
  if (j.contains("lambda")) s.lambda = get_number(j["lambda"], "sampler.lambda");
}

void parse_guidance(const json& j, GuidanceConfig& g) {
  require_object(j, "guidance");
  check_keys(j, "guidance", {"mode", "scale", "dds", "dds_iters"});
  if (j.contains("mode"))
    g.mode = as_config_error("guidance.mode", [&] { return guidance_mode_from_string(get_string(j["mode"], "guidance.mode")); });
  if (j.contains("scale")) g.scale = get_number(j["scale"], "guidance.scale");
  if (j.contains("dds")) g.dds_enabled = get_bool(j["dds"], "guidance.dds");
  if (j.contains("dds_iters")) g.dds_iters = static_cast<int>(get_integer(j["dds_iters"], "guidance.dds_iters"));
}

RunSpec parse_run(const json& j) {
  require_object(j, "run");
  check_keys(j, "run", {"num_seeds", "base_seed", "out_dir", "dump_frames", "trajectory_csv", "threads"});
  RunSpec r;
  if (j.contains("num_seeds")) r.num_seeds = static_cast<int>(get_integer(j["num_seeds"], "run.num_seeds"));
  if (j.contains("base_seed")) {
    const json& s = j["base_seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("run.base_seed", "expected a non-negative integer");
    r.base_seed = s.get<std::uint64_t>();
  }
  if (j.contains("out_dir")) r.out_dir = get_string(j["out_dir"], "run.out_dir");
  if (j.contains("dump_frames")) r.dump_frames = get_bool(j["dump_frames"], "run.dump_frames");
  if (j.contains("trajectory_csv")) r.trajectory_csv = get_bool(j["trajectory_csv"], "run.trajectory_csv");
  if (j.contains("threads")) r.threads = static_cast<int>(get_integer(j["threads"], "run.threads"));
  return r;
}

// Frame-major ramp from +1 at frame 0 to -1 at frame F-1, identical across dims.
LatentVideo ramp(std::size_t F, std::size_t D) {
  LatentVideo g(F, D);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t k = 0; k < D; ++k) g(f, k) = 1.0 - 2.0 * static_cast<double>(f) / static_cast<double>(F - 1);
  return g;
}

// Temporal polynomials ((i - c) / c)^j times a fixed spatial pattern; each is
// symmetric or antisymmetric under time reversal, so the span is flip-invariant.
std::vector<LatentVideo> default_basis(std::size_t F, std::size_t D, int rank) {
  std::vector<double> u(D);
  double un = 0.0;
  for (std::size_t k = 0; k < D; ++k) {
    u[k] = 1.0 + static_cast<double>(k);
    un += u[k] * u[k];
  }
  un = std::sqrt(un);
  const double c = 0.5 * static_cast<double>(F - 1);
  std::vector<LatentVideo> basis;
  for (int j = 0; j < rank; ++j) {
    LatentVideo b(F, D);
    for (std::size_t f = 0; f < F; ++f) {
      const double p = std::pow((static_cast<double>(f) - c) / c, j);
      for (std::size_t k = 0; k < D; ++k) b(f, k) = p * u[k] / un;
    }
    basis.push_back(std::move(b));
  }
  return basis;
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  const std::size_t F = model.frames, D = model.dims, n = F * D;
  if (F < 3) throw ConfigError("model.frames", "must be >= 3");
  if (D < 1) throw ConfigError("model.dims", "must be >= 1");
  switch (model.kind) {
    case ModelKind::kPoint: broadcast(model.value, n, "model.value"); break;
    case ModelKind::kAr1:
      if (!(model.phi > -1.0 && model.phi < 1.0)) throw ConfigError("model.phi", "must lie in (-1, 1)");
      [[fallthrough]];
    case ModelKind::kGauss:
      if (!(model.tau > 0.0)) throw ConfigError("model.tau", "must be > 0");
      broadcast(model.mean, n, "model.mean");
      break;
    case ModelKind::kSubspace:
      if (!(model.tau > 0.0)) throw ConfigError("model.tau", "must be > 0");
      broadcast(model.mean, n, "model.mean");
      if (model.rank < 1 || static_cast<std::size_t>(model.rank) > n)
        throw ConfigError("model.rank", "must lie in [1, frames*dims]");
      if (!model.basis.empty()) {
        if (model.basis.size() != static_cast<std::size_t>(model.rank))
          throw ConfigError("model.basis", "must contain exactly 'rank' vectors");
        for (std::size_t i = 0; i < model.basis.size(); ++i)
          if (model.basis[i].size() != n)
            throw ConfigError("model.basis[" + std::to_string(i) + "]", "expected " + std::to_string(n) + " values");
      }
      break;
    case ModelKind::kGmm: {
      if (model.components.empty()) throw ConfigError("model.components", "must be non-empty");
      double total = 0.0;
      for (std::size_t i = 0; i < model.components.size(); ++i) {
        const auto& c = model.components[i];
        const std::string p = "model.components[" + std::to_string(i) + "]";
        if (!(c.weight > 0.0)) throw ConfigError(p + ".weight", "must be > 0");
        if (!(c.variance >= 0.0)) throw ConfigError(p + ".variance", "must be >= 0");
        broadcast(c.mean, n, p + ".mean");
        total += c.weight;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ConfigError("model.components", "weights must sum to 1");
      break;
    }
  }
  if (!conditioning.start.empty() && conditioning.start.size() != D)
    throw ConfigError("conditioning.start", "expected " + std::to_string(D) + " values");
  if (!conditioning.end.empty() && conditioning.end.size() != D)
    throw ConfigError("conditioning.end", "expected " + std::to_string(D) + " values");

  try {
    sampler.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError("sampler", e.what());
  }
  if (run.num_seeds < 1) throw ConfigError("run.num_seeds", "must be >= 1");
  if (run.threads < 0) throw ConfigError("run.threads", "must be >= 0");
  if ((run.dump_frames || run.trajectory_csv) && run.out_dir.empty())
    throw ConfigError("run.out_dir", "required when dump_frames or trajectory_csv is set");
}

ModelInstance build_model(const ModelSpec& spec) {
  const std::size_t F = spec.frames, D = spec.dims, n = F * D;
  auto video = [&](const std::vector<double>& v, const std::string& path) {
    return LatentVideo(F, D, broadcast(v, n, path));
  };
  try {
    switch (spec.kind) {
      case ModelKind::kPoint:
        return GaussianVideoModel::point_mass(spec.value.empty() ? ramp(F, D) : video(spec.value, "model.value"));
      case ModelKind::kGauss: return GaussianVideoModel::isotropic(video(spec.mean, "model.mean"), spec.tau);
      case ModelKind::kAr1: return GaussianVideoModel::ar1(video(spec.mean, "model.mean"), spec.tau, spec.phi);
      case ModelKind::kSubspace: {
        std::vector<LatentVideo> basis;
        if (spec.basis.empty()) {
          basis = default_basis(F, D, spec.rank);
        } else {
          for (std::size_t i = 0; i < spec.basis.size(); ++i)
            basis.push_back(video(spec.basis[i], "model.basis[" + std::to_string(i) + "]"));
        }
        return GaussianVideoModel::subspace(video(spec.mean, "model.mean"), basis, spec.tau);
      }
      case ModelKind::kGmm: {
        std::vector<GmmComponent> comps;
        for (std::size_t i = 0; i < spec.components.size(); ++i) {
          const auto& c = spec.components[i];
          comps.push_back({c.weight, video(c.mean, "model.components[" + std::to_string(i) + "].mean"), c.variance});
        }
        return GmmVideoModel(std::move(comps));
      }
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError("model", e.what());
  } catch (const ShapeMismatch& e) {
    throw ConfigError("model", e.what());
  }
  throw ConfigError("model.kind", "unhandled model kind");
}

const DenoiserModel& as_denoiser(const ModelInstance& m) {
  return std::visit([](const auto& x) -> const DenoiserModel& { return x; }, m);
}

const GaussianVideoModel* as_gaussian(const ModelInstance& m) { return std::get_if<GaussianVideoModel>(&m); }

Conditioning resolve_conditioning(const ExperimentConfig& config, const ModelInstance& model) {
  const auto& denoiser = as_denoiser(model);
  const std::size_t F = denoiser.frames(), D = denoiser.dims();
  LatentVideo reference;
  if (const auto* g = as_gaussian(model)) {
    reference = from_eigen(g->mean() + g->covariance() * to_eigen(ramp(F, D)), F, D);
  } else {
    const auto& comps = std::get<GmmVideoModel>(model).components();
    reference = std::ranges::max_element(comps, {}, &GmmComponent::weight)->mean;
  }
  Conditioning c;
  c.start = config.conditioning.start.empty() ? reference.frame_copy(0) : Frame(config.conditioning.start);
  c.end = config.conditioning.end.empty() ? reference.frame_copy(F - 1) : Frame(config.conditioning.end);
  c.metadata = config.conditioning.metadata;
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "");
  check_keys(doc, "", {"model", "conditioning", "sampler", "guidance", "run"});
  ExperimentConfig cfg;
  if (!doc.contains("model")) throw ConfigError("model", "missing");
  cfg.model = parse_model(doc["model"]);
  if (doc.contains("conditioning")) cfg.conditioning = parse_conditioning(doc["conditioning"]);
  if (doc.contains("sampler")) parse_sampler(doc["sampler"], cfg.sampler);
  cfg.sampler.guidance = default_guidance(cfg.sampler.kind);
  if (doc.contains("guidance")) parse_guidance(doc["guidance"], cfg.sampler.guidance);
  if (doc.contains("run")) cfg.run = parse_run(doc["run"]);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json model = {{"kind", to_string(c.model.kind)}, {"frames", c.model.frames}, {"dims", c.model.dims}};
  switch (c.model.kind) {
    case ModelKind::kPoint: model["value"] = c.model.value; break;
    case ModelKind::kAr1: model["phi"] = c.model.phi; [[fallthrough]];
    case ModelKind::kGauss:
      model["mean"] = c.model.mean;
      model["tau"] = c.model.tau;
      break;
    case ModelKind::kSubspace:
      model["mean"] = c.model.mean;
      model["tau"] = c.model.tau;
      model["rank"] = c.model.rank;
      model["basis"] = c.model.basis;
      break;
    case ModelKind::kGmm: {
      json comps = json::array();
      for (const auto& comp : c.model.components)
        comps.push_back({{"weight", comp.weight}, {"mean", comp.mean}, {"variance", comp.variance}});
      model["components"] = comps;
      break;
    }
  }
  json conditioning = {{"start", c.conditioning.start}, {"end", c.conditioning.end},
                       {"metadata", c.conditioning.metadata}};
  json sampler = {{"kind", to_string(c.sampler.kind)},
                  {"steps", c.sampler.schedule.steps},
                  {"sigma_min", c.sampler.schedule.sigma_min},
                  {"sigma_max", c.sampler.schedule.sigma_max},
                  {"rho", c.sampler.schedule.rho},
                  {"lambda", c.sampler.lambda}};
  json guidance = {{"mode", to_string(c.sampler.guidance.mode)},
                   {"scale", c.sampler.guidance.scale},
                   {"dds", c.sampler.guidance.dds_enabled},
                   {"dds_iters", c.sampler.guidance.dds_iters}};
  json run = {{"num_seeds", c.run.num_seeds},
              {"base_seed", c.run.base_seed},
              {"out_dir", c.run.out_dir},
              {"dump_frames", c.run.dump_frames},
              {"trajectory_csv", c.run.trajectory_csv},
              {"threads", c.run.threads}};
  return {{"model", model}, {"conditioning", conditioning}, {"sampler", sampler}, {"guidance", guidance}, {"run", run}};
}

ExperimentConfig default_config(ModelKind kind) {
  ExperimentConfig c;
  c.model.kind = kind;
  if (kind == ModelKind::kSubspace) c.model.dims = 8;
  if (kind == ModelKind::kGmm) {
    c.model.components = {{0.5, {1.0}, 0.1}, {0.5, {-1.0}, 0.1}};
  }
  c.sampler.kind = SamplerKind::kVibidFull;
  c.sampler.guidance = default_guidance(c.sampler.kind);
  return c;
}

}  // namespace vibid
