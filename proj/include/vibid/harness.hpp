#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibid/config.hpp"
#include "vibid/metrics.hpp"
#include "vibid/sampler.hpp"

namespace vibid {

inline constexpr int kReportSchemaVersion = 1;

enum class Execution { kSerial, kParallel };

struct SeedResult {
  std::uint64_t seed = 0;
  MetricReport metrics;
  bool has_offmanifold = false;
  int nfe = 0;
  LatentVideo sample;
  TrajectoryRecord trajectory;
};

/// One sampling run per seed, base_seed .. base_seed + num_seeds - 1, results
/// ordered by seed. The parallel path fans seeds out with OpenMP; the serial
/// path is the reference it must match bit for bit.
std::vector<SeedResult> run_seeds(const ExperimentConfig& config, Execution exec = Execution::kParallel,
                                  bool keep_trajectories = false);

struct Aggregate {
  double median = 0.0;
  double iqr = 0.0;
};

struct RunReport {
  nlohmann::json config_echo;
  std::vector<SeedResult> seeds;
  Aggregate endpoint_start_err;
  Aggregate endpoint_end_err;
  Aggregate smoothness;
  Aggregate offmanifold;
  bool has_offmanifold = false;
  bool has_bridge = false;
  double bridge_mean_err = 0.0;
  double bridge_cov_err = 0.0;
  int nfe_per_run = 0;
  long long nfe_total = 0;

  nlohmann::json to_json() const;
};

/// Key-sorted, locale-independent serialization; identical reports give identical bytes.
std::string canonical_dump(const nlohmann::json& doc);

/// Runs every seed, computes metrics and, when config.run.out_dir is set, writes
/// report.json (plus trajectory CSVs and VBDS dumps when requested).
RunReport run(const ExperimentConfig& config, Execution exec = Execution::kParallel);

struct MetricComparison {
  std::string metric;
  std::vector<double> deltas;  // b - a per seed
  double median_a = 0.0;
  double median_b = 0.0;
  double median_delta = 0.0;
  int positive = 0;
  int negative = 0;
  int ties = 0;
  double p_value = 1.0;
};

struct ComparisonReport {
  RunReport a;
  RunReport b;
  std::vector<MetricComparison> metrics;

  nlohmann::json to_json() const;
};

/// Seed-matched paired comparison of two configs that may differ only in their
/// sampler and guidance blocks.
ComparisonReport compare(const ExperimentConfig& a, const ExperimentConfig& b,
                         Execution exec = Execution::kParallel);

struct SweepRow {
  double scale = 0.0;
  RunReport report;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  nlohmann::json to_json() const;
  /// scale,endpoint_start_med,endpoint_end_med,smoothness_med,offmanifold_med,bridge_mean_err,bridge_cov_err
  std::string to_csv() const;
};

/// CFG++ guidance-scale ablation: one run batch per scale.
SweepReport ablate_cfgpp_scale(const ExperimentConfig& base, const std::vector<double>& scales,
                               Execution exec = Execution::kParallel);

/// Analytic bridge statistics for the config's Gaussian model and conditioning.
nlohmann::json oracle_report(const ExperimentConfig& config);

}  // namespace vibid
