#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vibid/denoiser.hpp"
#include "vibid/latent.hpp"
#include "vibid/sampler.hpp"

namespace vibid {

enum class ModelKind { kPoint, kGauss, kAr1, kSubspace, kGmm };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct GmmComponentSpec {
  double weight = 1.0;
  std::vector<double> mean;  // empty, scalar (broadcast) or F*D values
  double variance = 0.0;

  bool operator==(const GmmComponentSpec&) const = default;
};

/// Model block. Vectors follow a broadcast rule: empty means zeros, a single
/// value fills every entry, otherwise exactly F*D (or D for frames) entries.
struct ModelSpec {
  ModelKind kind = ModelKind::kAr1;
  std::size_t frames = 9;
  std::size_t dims = 2;
  std::vector<double> mean;
  double tau = 1.0;
  double phi = 0.9;
  int rank = 2;
  std::vector<std::vector<double>> basis;  // subspace: explicit basis vectors (F*D each)
  std::vector<double> value;               // point: the atom
  std::vector<GmmComponentSpec> components;

  bool operator==(const ModelSpec&) const = default;
};

struct RunSpec {
  int num_seeds = 1;
  std::uint64_t base_seed = 0;
  std::string out_dir;
  bool dump_frames = false;
  bool trajectory_csv = false;
  int threads = 0;  // 0: OpenMP default

  bool operator==(const RunSpec&) const = default;
};

struct ConditioningSpec {
  std::vector<double> start;  // empty: derived from the model
  std::vector<double> end;
  std::map<std::string, std::string> metadata;

  bool operator==(const ConditioningSpec&) const = default;
};

struct ExperimentConfig {
  ModelSpec model;
  ConditioningSpec conditioning;
  SamplerConfig sampler;
  RunSpec run;

  /// Cross-field checks; throws ConfigError with the field path.
  void validate() const;
};

using ModelInstance = std::variant<GaussianVideoModel, GmmVideoModel>;

ModelInstance build_model(const ModelSpec& spec);
const DenoiserModel& as_denoiser(const ModelInstance& m);
const GaussianVideoModel* as_gaussian(const ModelInstance& m);

/// Explicit conditioning frames, or frames 0 and F-1 of a reference video on
/// the model's support when none are given.
Conditioning resolve_conditioning(const ExperimentConfig& config, const ModelInstance& model);

/// Strict parse: unknown keys, wrong types and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Default experiment for a model kind (used when the CLI runs without --config).
ExperimentConfig default_config(ModelKind kind = ModelKind::kAr1);

/// Broadcast helper shared by config consumers.
std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, const std::string& path);

}  // namespace vibid
