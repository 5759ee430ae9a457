#include <doctest.h>

#include <json.hpp>

#include "vibid/config.hpp"
#include "vibid/errors.hpp"

using namespace vibid;
using nlohmann::json;

namespace {

std::string error_path(const json& doc) {
  try {
    (void)parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const auto cfg = parse_config(json{{"model", {{"kind", "ar1"}}}});
  CHECK(cfg.model.kind == ModelKind::kAr1);
  CHECK(cfg.model.frames == 9);
  CHECK(cfg.model.dims == 2);
  CHECK(cfg.sampler.kind == SamplerKind::kVibidFull);
  CHECK(cfg.sampler.schedule.steps == 25);
  CHECK(cfg.sampler.guidance.mode == GuidanceMode::kCfgPlusPlus);
  CHECK(cfg.sampler.guidance.dds_enabled);
  CHECK(cfg.run.num_seeds == 1);
}

TEST_CASE("guidance defaults follow the sampler kind") {
  const auto cfg = parse_config(json{{"model", {{"kind", "ar1"}}}, {"sampler", {{"kind", "bidi"}}}});
  CHECK(cfg.sampler.guidance.mode == GuidanceMode::kCfg);
  CHECK_FALSE(cfg.sampler.guidance.dds_enabled);
}

TEST_CASE("strict parsing reports the offending path") {
  const json base = {{"model", {{"kind", "ar1"}}}};
  auto with = [&](const json& patch) {
    json d = base;
    d.merge_patch(patch);
    return d;
  };
  CHECK(error_path(json::object()) == "model");
  CHECK(error_path(with({{"extra", 1}})) == "extra");
  CHECK(error_path(with({{"model", {{"colour", "red"}}}})) == "model.colour");
  CHECK(error_path(with({{"model", {{"kind", "gauss"}, {"phi", 0.5}}}})) == "model.phi");
  CHECK(error_path(with({{"model", {{"kind", "vae"}}}})) == "model.kind");
  CHECK(error_path(with({{"model", {{"frames", 2}}}})) == "model.frames");
  CHECK(error_path(with({{"model", {{"frames", "nine"}}}})) == "model.frames");
  CHECK(error_path(with({{"model", {{"phi", 1.0}}}})) == "model.phi");
  CHECK(error_path(with({{"model", {{"mean", {1, 2, 3}}}}})) == "model.mean");
  CHECK(error_path(with({{"sampler", {{"kind", "ddim"}}}})) == "sampler.kind");
  CHECK(error_path(with({{"sampler", {{"step", 10}}}})) == "sampler.step");
  CHECK(error_path(with({{"guidance", {{"scale", 1.5}}}})) == "sampler");
  CHECK(error_path(with({{"guidance", {{"dds", "yes"}}}})) == "guidance.dds");
  CHECK(error_path(with({{"run", {{"num_seeds", 0}}}})) == "run.num_seeds");
  CHECK(error_path(with({{"run", {{"base_seed", -1}}}})) == "run.base_seed");
  CHECK(error_path(with({{"run", {{"dump_frames", true}}}})) == "run.out_dir");
  CHECK(error_path(with({{"conditioning", {{"start", {1, 2, 3}}}}})) == "conditioning.start");
  CHECK(error_path(with({{"conditioning", {{"fps", 8}}}})) == "conditioning.fps");
}

TEST_CASE("gmm and subspace validation") {
  const json gmm_bad = {{"model",
                         {{"kind", "gmm"},
                          {"frames", 3},
                          {"dims", 1},
                          {"components", {{{"weight", 0.5}, {"mean", 1.0}, {"variance", 0.1}}}}}}};
  CHECK(error_path(gmm_bad) == "model.components");
  const json gmm_key = {{"model", {{"kind", "gmm"}, {"components", {{{"weight", 1.0}, {"sd", 0.1}}}}}}};
  CHECK(error_path(gmm_key) == "model.components[0].sd");
  const json sub = {{"model", {{"kind", "subspace"}, {"frames", 3}, {"dims", 1}, {"rank", 4}}}};
  CHECK(error_path(sub) == "model.rank");
}

TEST_CASE("json round trip") {
  for (auto kind : {ModelKind::kPoint, ModelKind::kGauss, ModelKind::kAr1, ModelKind::kSubspace, ModelKind::kGmm}) {
    auto cfg = default_config(kind);
    cfg.conditioning.metadata["fps"] = "8";
    cfg.run.num_seeds = 3;
    const auto back = parse_config(to_json(cfg));
    CHECK(back.model == cfg.model);
    CHECK(back.conditioning == cfg.conditioning);
    CHECK(back.run == cfg.run);
    CHECK(to_json(back) == to_json(cfg));
  }
}

TEST_CASE("default conditioning lies on the model's support") {
  const auto cfg = default_config(ModelKind::kSubspace);
  const auto model = build_model(cfg.model);
  const auto cond = resolve_conditioning(cfg, model);
  const auto* g = as_gaussian(model);
  REQUIRE(g != nullptr);
  CHECK(cond.start.dims() == cfg.model.dims);
  // Explicit values override the derived ones.
  auto c2 = cfg;
  c2.conditioning.start = std::vector<double>(cfg.model.dims, 0.25);
  CHECK(resolve_conditioning(c2, model).start == Frame(std::vector<double>(cfg.model.dims, 0.25)));
  CHECK(resolve_conditioning(c2, model).end == cond.end);
}

TEST_CASE("broadcast") {
  CHECK(broadcast({}, 3, "x") == std::vector<double>{0, 0, 0});
  CHECK(broadcast({2}, 3, "x") == std::vector<double>{2, 2, 2});
  CHECK(broadcast({1, 2, 3}, 3, "x") == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(broadcast({1, 2}, 3, "x"), ConfigError);
}
