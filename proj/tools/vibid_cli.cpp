// vibid: command-line front end for the sampling harness.
//
//   vibid run     --config exp.json [overrides]
//   vibid compare --config a.json --config b.json      (or --sampler-b KIND)
//   vibid ablate  --config exp.json --scales 0.6,0.8,1.0
//   vibid oracle  --config exp.json
//
// Exit codes: 0 success, 2 configuration error, 3 runtime or numerical error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vibid/config.hpp"
#include "vibid/errors.hpp"
#include "vibid/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::optional<std::string> sampler;
  std::optional<int> steps;
  std::optional<std::size_t> frames;
  std::optional<std::size_t> dims;
  std::optional<std::string> cfg_mode;
  std::optional<double> cfg_scale;
  std::optional<int> dds_iters;
  std::optional<double> lambda;
  std::optional<std::string> model;
  std::optional<std::string> out;
  bool dump_frames = false;
  bool trajectory_csv = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool multi_config) {
  if (multi_config) {
    cmd->add_option("--config", o.configs, "Experiment config (JSON); give twice to compare two files");
  } else {
    cmd->add_option("--config", o.configs, "Experiment config (JSON)")->expected(1);
  }
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--seeds", o.seeds, "Number of seeds");
  cmd->add_option("--sampler", o.sampler, "Sampler: euler|fusion|bidi|vibid (resets guidance to its defaults)");
  cmd->add_option("--steps", o.steps, "Number of Euler steps T");
  cmd->add_option("--frames", o.frames, "Frame count F");
  cmd->add_option("--dims", o.dims, "Latent dimension D");
  cmd->add_option("--cfg-mode", o.cfg_mode, "Guidance: cfg|cfgpp");
  cmd->add_option("--cfg-scale", o.cfg_scale, "Guidance scale");
  cmd->add_option("--dds-iters", o.dds_iters, "DDS conjugate-gradient iterations (0 disables DDS)");
  cmd->add_option("--lambda", o.lambda, "Fusion interpolation ratio");
  cmd->add_option("--model", o.model, "Model: point|gauss|ar1|subspace|gmm (replaces the model block)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--dump-frames", o.dump_frames, "Write final samples as VBDS dumps (needs --out)");
  cmd->add_flag("--trajectory-csv", o.trajectory_csv, "Write per-step trajectory CSVs (needs --out)");
}

vibid::ExperimentConfig resolve(const std::optional<std::string>& path, const Overrides& o) {
  using namespace vibid;
  ExperimentConfig cfg = path ? load_config(*path) : default_config();
  try {
    if (o.model) {
      const ModelKind kind = model_kind_from_string(*o.model);
      if (!path || cfg.model.kind != kind) cfg.model = default_config(kind).model;
    }
    if (o.frames) cfg.model.frames = *o.frames;
    if (o.dims) cfg.model.dims = *o.dims;
    if (o.sampler) {
      cfg.sampler.kind = sampler_kind_from_string(*o.sampler);
      cfg.sampler.guidance = default_guidance(cfg.sampler.kind);
    }
    if (o.steps) cfg.sampler.schedule.steps = *o.steps;
    if (o.lambda) cfg.sampler.lambda = *o.lambda;
    if (o.cfg_mode) cfg.sampler.guidance.mode = guidance_mode_from_string(*o.cfg_mode);
    if (o.cfg_scale) cfg.sampler.guidance.scale = *o.cfg_scale;
    if (o.dds_iters) {
      cfg.sampler.guidance.dds_iters = *o.dds_iters;
      cfg.sampler.guidance.dds_enabled = *o.dds_iters > 0;
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError("cli", e.what());
  }
  if (o.seed) cfg.run.base_seed = *o.seed;
  if (o.seeds) cfg.run.num_seeds = *o.seeds;
  if (o.out) cfg.run.out_dir = *o.out;
  if (o.dump_frames) cfg.run.dump_frames = true;
  if (o.trajectory_csv) cfg.run.trajectory_csv = true;
  cfg.validate();
  return cfg;
}

std::optional<std::string> nth(const std::vector<std::string>& v, std::size_t i) {
  return i < v.size() ? std::optional<std::string>(v[i]) : std::nullopt;
}

void emit(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream os(std::filesystem::path(out_dir) / name, std::ios::binary);
  if (!os) throw vibid::IoError("cannot write " + (std::filesystem::path(out_dir) / name).string());
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional keyframe-interpolation sampler and experiment harness"};
  app.require_subcommand(1);

  Overrides run_o, cmp_o, abl_o, orc_o;
  auto* run_cmd = app.add_subcommand("run", "Sample num_seeds videos and report metrics");
  add_common(run_cmd, run_o, false);

  auto* cmp_cmd = app.add_subcommand("compare", "Seed-matched comparison of two sampler/guidance setups");
  add_common(cmp_cmd, cmp_o, true);
  std::optional<std::string> sampler_b;
  cmp_cmd->add_option("--sampler-b", sampler_b, "Derive the second config from the first with this sampler");

  auto* abl_cmd = app.add_subcommand("ablate", "CFG++ guidance-scale sweep");
  add_common(abl_cmd, abl_o, false);
  std::vector<double> scales{0.6, 0.8, 1.0};
  abl_cmd->add_option("--scales", scales, "Comma-separated guidance scales")->delimiter(',');

  auto* orc_cmd = app.add_subcommand("oracle", "Print analytic bridge statistics for a Gaussian model");
  add_common(orc_cmd, orc_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      const auto cfg = resolve(nth(run_o.configs, 0), run_o);
      const auto report = vibid::run(cfg);
      if (cfg.run.out_dir.empty()) {
        std::cout << vibid::canonical_dump(report.to_json());
      } else {
        std::cerr << "wrote " << (std::filesystem::path(cfg.run.out_dir) / "report.json").string() << " ("
                  << report.seeds.size() << " seeds, NFE " << report.nfe_total << ")\n";
      }
    } else if (cmp_cmd->parsed()) {
      if (cmp_o.configs.size() > 2) throw vibid::ConfigError("config", "compare takes at most two configs");
      const auto a = resolve(nth(cmp_o.configs, 0), cmp_o);
      vibid::ExperimentConfig b;
      if (cmp_o.configs.size() == 2) {
        b = resolve(nth(cmp_o.configs, 1), cmp_o);
      } else if (sampler_b) {
        Overrides ob = cmp_o;
        ob.sampler = sampler_b;
        b = resolve(nth(cmp_o.configs, 0), ob);
      } else {
        throw vibid::ConfigError("config", "compare needs a second --config or --sampler-b");
      }
      emit(a.run.out_dir, "comparison.json", vibid::canonical_dump(vibid::compare(a, b).to_json()));
    } else if (abl_cmd->parsed()) {
      const auto cfg = resolve(nth(abl_o.configs, 0), abl_o);
      const auto sweep = vibid::ablate_cfgpp_scale(cfg, scales);
      emit(cfg.run.out_dir, "sweep.json", vibid::canonical_dump(sweep.to_json()));
      emit(cfg.run.out_dir, "sweep.csv", sweep.to_csv());
    } else if (orc_cmd->parsed()) {
      const auto cfg = resolve(nth(orc_o.configs, 0), orc_o);
      std::cout << vibid::canonical_dump(vibid::oracle_report(cfg));
    }
  } catch (const vibid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
