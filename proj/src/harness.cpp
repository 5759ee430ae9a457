#include "vibid/harness.hpp"

#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>

#include <omp.h>

#include "vibid/dump.hpp"
#include "vibid/errors.hpp"
#include "vibid/stats.hpp"

namespace vibid {

using nlohmann::json;

namespace {

SeedResult run_one(const ExperimentConfig& config, const ModelInstance& model, const Conditioning& cond,
                   std::uint64_t seed, bool keep_trajectory) {
  const GaussianVideoModel* gauss = as_gaussian(model);
  SamplerConfig sc = config.sampler;
  sc.seed = seed;
  SampleOptions opts;
  if (keep_trajectory && gauss != nullptr)
    opts.offmanifold = [gauss](const LatentVideo& v) { return offmanifold_distance(v, *gauss); };

  SampleResult res = sample(sc, as_denoiser(model), cond, opts);
  SeedResult out;
  out.seed = seed;
  out.nfe = res.trajectory.nfe;
  const auto [e0, e1] = endpoint_error(res.sample, cond);
  out.metrics.endpoint_start_err = e0;
  out.metrics.endpoint_end_err = e1;
  out.metrics.smoothness = smoothness(res.sample);
  if (gauss != nullptr) {
    out.metrics.offmanifold = offmanifold_distance(res.sample, *gauss);
    out.has_offmanifold = true;
  }
  out.sample = std::move(res.sample);
  if (keep_trajectory) out.trajectory = std::move(res.trajectory);
  else out.trajectory.nfe = out.nfe;
  return out;
}

Aggregate aggregate(const std::vector<SeedResult>& seeds, double MetricReport::*field) {
  std::vector<double> v;
  v.reserve(seeds.size());
  for (const auto& s : seeds) v.push_back(s.metrics.*field);
  return {median(v), iqr(v)};
}

json aggregate_json(const Aggregate& a) { return {{"median", a.median}, {"iqr", a.iqr}}; }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

std::string residual_at(const std::vector<double>& r, bool last) {
  if (r.empty()) return "";
  return format_double(last ? r.back() : r.front());
}

std::string trajectory_csv(const TrajectoryRecord& traj) {
  std::ostringstream os;
  write_csv_row(os, {"t", "sigma", "sigma_prev", "nfe", "offmanifold", "dds_forward_initial", "dds_forward_final",
                     "dds_backward_initial", "dds_backward_final"});
  for (const auto& s : traj.steps) {
    write_csv_row(os, {std::to_string(s.t), format_double(s.sigma), format_double(s.sigma_prev),
                       std::to_string(s.nfe), s.offmanifold < 0.0 ? "" : format_double(s.offmanifold),
                       residual_at(s.dds_forward, false), residual_at(s.dds_forward, true),
                       residual_at(s.dds_backward, false), residual_at(s.dds_backward, true)});
  }
  return os.str();
}

}  // namespace

std::vector<SeedResult> run_seeds(const ExperimentConfig& config, Execution exec, bool keep_trajectories) {
  config.validate();
  const ModelInstance model = build_model(config.model);
  const Conditioning cond = resolve_conditioning(config, model);
  const int n = config.run.num_seeds;
  std::vector<SeedResult> results(static_cast<std::size_t>(n));

  if (exec == Execution::kSerial) {
    for (int i = 0; i < n; ++i)
      results[static_cast<std::size_t>(i)] =
          run_one(config, model, cond, config.run.base_seed + static_cast<std::uint64_t>(i), keep_trajectories);
    return results;
  }

  const int threads = config.run.threads > 0 ? config.run.threads : omp_get_max_threads();
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      results[static_cast<std::size_t>(i)] =
          run_one(config, model, cond, config.run.base_seed + static_cast<std::uint64_t>(i), keep_trajectories);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::string canonical_dump(const json& doc) { return doc.dump(2) + "\n"; }

json RunReport::to_json() const {
  json seeds_json = json::array();
  for (const auto& s : seeds) {
    json e = {{"seed", s.seed},
              {"endpoint_start_err", s.metrics.endpoint_start_err},
              {"endpoint_end_err", s.metrics.endpoint_end_err},
              {"smoothness", s.metrics.smoothness},
              {"nfe", s.nfe}};
    e["offmanifold"] = s.has_offmanifold ? json(s.metrics.offmanifold) : json(nullptr);
    seeds_json.push_back(std::move(e));
  }
  json agg = {{"endpoint_start_err", aggregate_json(endpoint_start_err)},
              {"endpoint_end_err", aggregate_json(endpoint_end_err)},
              {"smoothness", aggregate_json(smoothness)}};
  agg["offmanifold"] = has_offmanifold ? aggregate_json(offmanifold) : json(nullptr);
  json doc = {{"schema_version", kReportSchemaVersion},
              {"config", config_echo},
              {"seeds", seeds_json},
              {"aggregate", agg},
              {"nfe", {{"per_run", nfe_per_run}, {"total", nfe_total}, {"runs", seeds.size()}}}};
  doc["bridge"] = has_bridge ? json{{"mean_err", bridge_mean_err}, {"cov_err", bridge_cov_err}} : json(nullptr);
  return doc;
}

RunReport run(const ExperimentConfig& config, Execution exec) {
  RunReport rep;
  rep.config_echo = to_json(config);
  rep.seeds = run_seeds(config, exec, config.run.trajectory_csv);
  rep.endpoint_start_err = aggregate(rep.seeds, &MetricReport::endpoint_start_err);
  rep.endpoint_end_err = aggregate(rep.seeds, &MetricReport::endpoint_end_err);
  rep.smoothness = aggregate(rep.seeds, &MetricReport::smoothness);
  rep.has_offmanifold = !rep.seeds.empty() && rep.seeds.front().has_offmanifold;
  if (rep.has_offmanifold) rep.offmanifold = aggregate(rep.seeds, &MetricReport::offmanifold);
  rep.nfe_per_run = config.sampler.schedule.steps * nfe_per_step(config.sampler.kind);
  for (const auto& s : rep.seeds) rep.nfe_total += s.nfe;

  const ModelInstance model = build_model(config.model);
  if (const auto* gauss = as_gaussian(model); gauss != nullptr && rep.seeds.size() >= 2) {
    const Conditioning cond = resolve_conditioning(config, model);
    const BridgeStatistics oracle = bridge_oracle(*gauss, cond.start, cond.end);
    std::vector<LatentVideo> samples;
    samples.reserve(rep.seeds.size());
    for (const auto& s : rep.seeds) samples.push_back(s.sample);
    std::tie(rep.bridge_mean_err, rep.bridge_cov_err) = bridge_divergence(samples, oracle);
    rep.has_bridge = true;
  }

  if (!config.run.out_dir.empty()) {
    const std::filesystem::path dir(config.run.out_dir);
    ensure_dir(dir);
    write_text(dir / "report.json", canonical_dump(rep.to_json()));
    for (const auto& s : rep.seeds) {
      const std::string stem = "seed_" + std::to_string(s.seed);
      if (config.run.trajectory_csv) write_text(dir / (stem + "_trajectory.csv"), trajectory_csv(s.trajectory));
      if (config.run.dump_frames) write_vbds(dir / (stem + ".vbds"), s.sample);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

json ComparisonReport::to_json() const {
  json ms = json::array();
  for (const auto& m : metrics) {
    ms.push_back({{"metric", m.metric},
                  {"median_a", m.median_a},
                  {"median_b", m.median_b},
                  {"median_delta", m.median_delta},
                  {"positive", m.positive},
                  {"negative", m.negative},
                  {"ties", m.ties},
                  {"p_value", m.p_value},
                  {"deltas", m.deltas}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"a", a.to_json()}, {"b", b.to_json()}, {"comparisons", ms}};
}

ComparisonReport compare(const ExperimentConfig& a, const ExperimentConfig& b, Execution exec) {
  a.validate();
  b.validate();
  if (!(a.model == b.model)) throw ConfigError("model", "compare requires identical model blocks");
  if (!(a.conditioning == b.conditioning))
    throw ConfigError("conditioning", "compare requires identical conditioning blocks");
  if (a.run.num_seeds != b.run.num_seeds || a.run.base_seed != b.run.base_seed)
    throw ConfigError("run", "seed policy mismatch: compare needs the same base_seed and num_seeds");

  ComparisonReport rep;
  ExperimentConfig qa = a, qb = b;
  qa.run.out_dir.clear();
  qb.run.out_dir.clear();
  qa.run.dump_frames = qb.run.dump_frames = false;
  qa.run.trajectory_csv = qb.run.trajectory_csv = false;
  rep.a = run(qa, exec);
  rep.b = run(qb, exec);

  auto add = [&](const std::string& name, double MetricReport::*field) {
    MetricComparison m;
    m.metric = name;
    std::vector<double> va, vb;
    for (std::size_t i = 0; i < rep.a.seeds.size(); ++i) {
      va.push_back(rep.a.seeds[i].metrics.*field);
      vb.push_back(rep.b.seeds[i].metrics.*field);
      m.deltas.push_back(vb.back() - va.back());
    }
    m.median_a = median(va);
    m.median_b = median(vb);
    m.median_delta = median(m.deltas);
    const SignTest st = sign_test(m.deltas);
    m.positive = st.positive;
    m.negative = st.negative;
    m.ties = st.ties;
    m.p_value = st.p_value;
    rep.metrics.push_back(std::move(m));
  };
  add("endpoint_start_err", &MetricReport::endpoint_start_err);
  add("endpoint_end_err", &MetricReport::endpoint_end_err);
  add("smoothness", &MetricReport::smoothness);
  if (rep.a.has_offmanifold) add("offmanifold", &MetricReport::offmanifold);
  return rep;
}

// ---------------------------------------------------------------------------

json SweepReport::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) rs.push_back({{"scale", r.scale}, {"report", r.report.to_json()}});
  return {{"schema_version", kReportSchemaVersion}, {"rows", rs}};
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  write_csv_row(os, {"scale", "endpoint_start_med", "endpoint_end_med", "smoothness_med", "offmanifold_med",
                     "bridge_mean_err", "bridge_cov_err"});
  for (const auto& r : rows) {
    const RunReport& p = r.report;
    write_csv_row(os, {format_double(r.scale), format_double(p.endpoint_start_err.median),
                       format_double(p.endpoint_end_err.median), format_double(p.smoothness.median),
                       p.has_offmanifold ? format_double(p.offmanifold.median) : "",
                       p.has_bridge ? format_double(p.bridge_mean_err) : "",
                       p.has_bridge ? format_double(p.bridge_cov_err) : ""});
  }
  return os.str();
}

SweepReport ablate_cfgpp_scale(const ExperimentConfig& base, const std::vector<double>& scales, Execution exec) {
  if (scales.empty()) throw ConfigError("scales", "at least one guidance scale is required");
  if (base.sampler.guidance.mode != GuidanceMode::kCfgPlusPlus)
    throw ConfigError("guidance.mode", "the scale ablation requires CFG++ guidance");
  SweepReport out;
  for (double s : scales) {
    ExperimentConfig cfg = base;
    cfg.sampler.guidance.scale = s;
    cfg.run.out_dir.clear();
    cfg.run.dump_frames = false;
    cfg.run.trajectory_csv = false;
    cfg.validate();
    out.rows.push_back({s, run(cfg, exec)});
  }
  return out;
}

json oracle_report(const ExperimentConfig& config) {
  config.validate();
  const ModelInstance model = build_model(config.model);
  const auto* gauss = as_gaussian(model);
  if (gauss == nullptr) throw ConfigError("model.kind", "the bridge oracle requires a Gaussian model");
  const Conditioning cond = resolve_conditioning(config, model);
  const BridgeStatistics b = bridge_oracle(*gauss, cond.start, cond.end);

  json mean = json::array();
  for (std::size_t f = 0; f < b.mean.frames(); ++f) {
    auto fr = b.mean.frame(f);
    mean.push_back(std::vector<double>(fr.begin(), fr.end()));
  }
  json cov = json::array();
  std::vector<double> sd;
  for (Eigen::Index i = 0; i < b.covariance.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < b.covariance.cols(); ++j) row.push_back(b.covariance(i, j));
    cov.push_back(row);
    sd.push_back(std::sqrt(std::max(0.0, b.covariance(i, i))));
  }
  return {{"schema_version", kReportSchemaVersion},
          {"model", to_json(config)["model"]},
          {"start", std::vector<double>(cond.start.values().begin(), cond.start.values().end())},
          {"end", std::vector<double>(cond.end.values().begin(), cond.end.values().end())},
          {"interior_mean", mean},
          {"interior_covariance", cov},
          {"interior_std", sd},
          {"regularized", b.regularized}};
}

}  // namespace vibid
