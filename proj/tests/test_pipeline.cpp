// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "seqguard/error.hpp"
#include "seqguard/pipeline.hpp"

using namespace seqguard;
using namespace seqguard::testing;

namespace {

PipelineConfig tiny_config() {
  PipelineConfig cfg;
  cfg.seed = 5;
  cfg.n_good = 80;
  cfg.domains = 4;
  cfg.embed_dim = 16;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 8;
  cfg.train.lr = 1e-2;
  cfg.train.h_mid = 8;
  cfg.train.latent = 8;
  cfg.iforest_trees = 10;
  cfg.bench = false;
  return cfg;
}

}  // namespace

TEST_CASE("splits are disjoint and balanced") {
  const auto cfg = tiny_config();
  const DataSplits s = make_splits(cfg);
  std::set<std::string> ids;
  std::size_t val_anom = 0, test_anom = 0;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const auto& r : *part) CHECK(ids.insert(r.id).second);
  for (const auto& r : s.train) CHECK(r.label == Label::good);
  for (const auto& r : s.val) val_anom += r.label == Label::anomaly;
  for (const auto& r : s.test) test_anom += r.label == Label::anomaly;
  CHECK(2 * val_anom == s.val.size());
  CHECK(2 * test_anom == s.test.size());
  CHECK(s.train.size() + s.val.size() / 2 + s.test.size() / 2 == 80);
  CHECK(s.test.size() / 2 == 16);
}

TEST_CASE("pipeline config JSON") {
  const Json doc = {{"seed", 9}, {"n_good", 40}, {"train", {{"epochs", 3}}}, {"bench", false}};
  const PipelineConfig cfg = pipeline_config_from_json(doc);
  CHECK(cfg.seed == 9);
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.train.seed == 9);
  CHECK(cfg.synth.seed == 9);
  CHECK(pipeline_config_from_json(to_json(cfg)).n_good == 40);
  CHECK_THROWS_AS(pipeline_config_from_json(Json{{"n_goods", 3}}), FormatError);
}

TEST_CASE("pipeline run is deterministic and writes its artifacts") {
  const auto cfg = tiny_config();
  const auto a = scratch_dir("pipeline-a");
  const auto b = scratch_dir("pipeline-b");
  const PipelineResult ra = run_pipeline(cfg, a);
  const PipelineResult rb = run_pipeline(cfg, b);
  CHECK(ra.report(cfg).dump() == rb.report(cfg).dump());
  for (const char* f : {"report.json", "model.json", "calibration.json", "scores.jsonl",
                        "history.csv", "train.jsonl", "test.emb.jsonl"})
    CHECK_MESSAGE(read_file(a / f) == read_file(b / f), f);
  CHECK(ra.baselines.size() == 2);
  CHECK(ra.test.count == ra.test_scores.size());
  const Json rep = Json::parse(read_file(a / "report.json"));
  CHECK(rep.contains("test"));
  CHECK(rep.contains("baselines"));
  CHECK(load_calibration(a / "calibration.json").threshold == ra.calibration.threshold);
}

TEST_CASE("stage failures name the stage") {
  auto cfg = tiny_config();
  cfg.train.batch_size = 500;
  try {
    run_pipeline(cfg, std::nullopt);
    FAIL("expected a PreconditionError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("stage 'train'") != std::string::npos);
    CHECK(e.kind() == "precondition");
  }
}
