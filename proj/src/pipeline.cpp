// SPDX-License-Identifier: Apache-2.0
#include "seqguard/pipeline.hpp"

#include <set>

#include "seqguard/error.hpp"

namespace seqguard {

void PipelineConfig::validate() const {
  if (n_good < 10) throw PreconditionError("pipeline: n_good must be >= 10");
  if (domains < 2) throw PreconditionError("pipeline: domains must be >= 2");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw PreconditionError("pipeline: test_fraction must be in (0, 1)");
  if (embed_dim < 8) throw PreconditionError("pipeline: embed_dim must be >= 8");
  if (synth.k_min < 1 || synth.k_max > 3 || synth.k_min > synth.k_max)
    throw PreconditionError("pipeline: contextual k must satisfy 1 <= k_min <= k_max <= 3");
  if (!(synth.structural_frac >= 0.0 && synth.structural_frac <= 1.0))
    throw PreconditionError("pipeline: structural_frac must be in [0, 1]");
  train.validate();
}

PipelineConfig pipeline_config_from_json(const Json& doc) {
  if (!doc.is_object()) throw FormatError("pipeline config must be a JSON object");
  static const std::set<std::string> known = {
      "seed",          "n_good",          "domains", "test_fraction", "embed_dim",
      "embed_seed",    "synth",           "train",   "iforest_trees",
      "iforest_subsample", "bench",       "bench_warmup", "bench_reps"};
  for (const auto& [key, _] : doc.items())
    if (!known.contains(key)) throw FormatError("pipeline config: unknown key '" + key + "'");
  PipelineConfig cfg;
  try {
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("n_good")) cfg.n_good = doc["n_good"].get<std::size_t>();
    if (doc.contains("domains")) cfg.domains = doc["domains"].get<int>();
    if (doc.contains("test_fraction")) cfg.test_fraction = doc["test_fraction"].get<double>();
    if (doc.contains("embed_dim")) cfg.embed_dim = doc["embed_dim"].get<int>();
    if (doc.contains("embed_seed")) cfg.embed_seed = doc["embed_seed"].get<std::uint64_t>();
    if (doc.contains("iforest_trees")) cfg.iforest_trees = doc["iforest_trees"].get<std::size_t>();
    if (doc.contains("iforest_subsample"))
      cfg.iforest_subsample = doc["iforest_subsample"].get<std::size_t>();
    if (doc.contains("bench")) cfg.bench = doc["bench"].get<bool>();
    if (doc.contains("bench_warmup")) cfg.bench_warmup = doc["bench_warmup"].get<std::size_t>();
    if (doc.contains("bench_reps")) cfg.bench_reps = doc["bench_reps"].get<std::size_t>();
    cfg.synth.seed = cfg.seed;
    if (doc.contains("synth")) {
      const Json& s = doc["synth"];
      for (const auto& [key, _] : s.items())
        if (key != "k_min" && key != "k_max" && key != "structural_frac" && key != "seed")
          throw FormatError("pipeline config: unknown synth key '" + key + "'");
      if (s.contains("k_min")) cfg.synth.k_min = s["k_min"].get<int>();
      if (s.contains("k_max")) cfg.synth.k_max = s["k_max"].get<int>();
      if (s.contains("structural_frac")) cfg.synth.structural_frac = s["structural_frac"].get<double>();
      if (s.contains("seed")) cfg.synth.seed = s["seed"].get<std::uint64_t>();
    }
    Json t = doc.contains("train") ? doc["train"] : Json::object();
    if (!t.contains("seed")) t["seed"] = cfg.seed;
    cfg.train = train_config_from_json(t);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json to_json(const PipelineConfig& cfg) {
  return Json{{"seed", cfg.seed},
              {"n_good", cfg.n_good},
              {"domains", cfg.domains},
              {"test_fraction", cfg.test_fraction},
              {"embed_dim", cfg.embed_dim},
              {"embed_seed", cfg.embed_seed},
              {"synth",
               {{"k_min", cfg.synth.k_min},
                {"k_max", cfg.synth.k_max},
                {"structural_frac", cfg.synth.structural_frac},
                {"seed", cfg.synth.seed}}},
              {"train", to_json(cfg.train)},
              {"iforest_trees", cfg.iforest_trees},
              {"iforest_subsample", cfg.iforest_subsample},
              {"bench", cfg.bench},
              {"bench_warmup", cfg.bench_warmup},
              {"bench_reps", cfg.bench_reps}};
}

DataSplits make_splits(const PipelineConfig& cfg) {
  Rng corpus_rng = Rng(cfg.seed).split("corpus");
  const auto goods = gen_toy_corpus(cfg.n_good, cfg.domains, corpus_rng);
  const std::uint64_t test_seed = Rng(cfg.seed).split("test-split").next();
  auto [pool, test_goods] = split_train_val(goods, cfg.test_fraction, test_seed);
  auto [train_goods, val_goods] =
      split_train_val(pool, cfg.train.val_fraction, cfg.train.seed);
  const StepPool& steps = builtin_step_pool();
  DataSplits out;
  out.train = std::move(train_goods);
  auto with_anomalies = [&](std::vector<TrajectoryRecord> g) {
    auto anomalies = synthesize_anomalies(g, cfg.synth, steps);
    g.insert(g.end(), anomalies.begin(), anomalies.end());
    return g;
  };
  out.val = with_anomalies(std::move(val_goods));
  out.test = with_anomalies(std::move(test_goods));
  return out;
}

ExperimentData prepare_experiment(const PipelineConfig& cfg) {
  cfg.validate();
  ExperimentData d;
  d.records = make_splits(cfg);
  const HashEmbedder embedder(cfg.embed_dim, cfg.embed_seed);
  d.train = join_examples(d.records.train, embed_dataset(d.records.train, embedder));
  d.val = join_examples(d.records.val, embed_dataset(d.records.val, embedder));
  d.test = join_examples(d.records.test, embed_dataset(d.records.test, embedder));
  d.val_good = filter_label(d.val, Label::good);
  return d;
}

EvalReport evaluate_scores(const std::vector<double>& scores, double threshold,
                           double beta, const std::vector<Example>& examples) {
  std::vector<Label> preds, labels;
  std::vector<std::size_t> lengths;
  std::vector<std::string> sources;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    preds.push_back(classify(scores[i], threshold));
    labels.push_back(examples[i].label);
    lengths.push_back(static_cast<std::size_t>(examples[i].steps.rows()));
    sources.push_back(examples[i].source);
  }
  return compute_metrics(preds, labels, lengths, sources, threshold, beta);
}

namespace {

std::vector<Vector> pooled(const std::vector<Example>& examples) {
  std::vector<Vector> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(mean_pool(ex.steps));
  return out;
}

DetectorResult single_score_detector(std::string name,
                                     const std::vector<double>& val_scores,
                                     const std::vector<double>& test_scores,
                                     const ExperimentData& data) {
  const ThresholdChoice choice = sweep_threshold(val_scores, labels_of(data.val));
  DetectorResult r;
  r.name = std::move(name);
  r.threshold = choice.threshold;
  r.val_f1 = choice.f1;
  r.test = evaluate_scores(test_scores, choice.threshold, 0.0, data.test);
  return r;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error("internal", std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace

std::vector<DetectorResult> run_baselines(const ExperimentData& data,
                                          const PipelineConfig& cfg) {
  const auto train_pts = pooled(data.train);
  const auto val_pts = pooled(data.val);
  const auto test_pts = pooled(data.test);
  std::vector<DetectorResult> out;

  const IsolationForest forest =
      iforest_fit(train_pts, cfg.iforest_trees, cfg.iforest_subsample, cfg.seed);
  std::vector<double> val_s, test_s;
  for (const auto& p : val_pts) val_s.push_back(iforest_score(forest, p));
  for (const auto& p : test_pts) test_s.push_back(iforest_score(forest, p));
  out.push_back(single_score_detector("isolation_forest", val_s, test_s, data));

  const CentroidModel centroid = centroid_fit(train_pts);
  val_s.clear();
  test_s.clear();
  for (const auto& p : val_pts) val_s.push_back(centroid_score(centroid, p));
  for (const auto& p : test_pts) test_s.push_back(centroid_score(centroid, p));
  out.push_back(single_score_detector("centroid", val_s, test_s, data));
  return out;
}

Json PipelineResult::report(const PipelineConfig& cfg) const {
  Json baselines_json = Json::array();
  for (const auto& b : baselines)
    baselines_json.push_back(Json{{"name", b.name},
                                  {"threshold", b.threshold},
                                  {"val_f1", b.val_f1},
                                  {"test", b.test.to_json()}});
  return Json{{"config", to_json(cfg)},
              {"best_epoch", trained.history.best_epoch + 1},
              {"epochs_run", trained.history.val.size()},
              {"calibration",
               {{"mu_c", calibration.mu_c},
                {"sigma_c", calibration.sigma_c},
                {"mu_r", calibration.mu_r},
                {"sigma_r", calibration.sigma_r},
                {"beta", calibration.beta},
                {"threshold", calibration.threshold},
                {"val_f1", calibration.val_f1}}},
              {"test", test.to_json()},
              {"baselines", baselines_json}};
}

std::string scores_jsonl(const std::vector<Example>& examples,
                         const std::vector<ScoreParts>& parts,
                         const CalibrationArtifact& cal) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const double s = fuse(parts[i], cal);
    out += Json{{"id", examples[i].id},
                {"d_contrastive", parts[i].d_contrastive},
                {"e_recon", parts[i].e_recon},
                {"score", s},
                {"prediction", to_string(classify(s, cal.threshold))}}
               .dump();
    out += '\n';
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::optional<std::filesystem::path>& out_dir) {
  stage("config", [&] { cfg.validate(); });
  const ExperimentData data = stage("data", [&] { return prepare_experiment(cfg); });
  if (out_dir) {
    stage("write-data", [&] {
      write_dataset(*out_dir / "train.jsonl", data.records.train);
      write_dataset(*out_dir / "val.jsonl", data.records.val);
      write_dataset(*out_dir / "test.jsonl", data.records.test);
      const HashEmbedder embedder(cfg.embed_dim, cfg.embed_seed);
      save_embeddings(*out_dir / "train.emb.jsonl", embed_dataset(data.records.train, embedder));
      save_embeddings(*out_dir / "val.emb.jsonl", embed_dataset(data.records.val, embedder));
      save_embeddings(*out_dir / "test.emb.jsonl", embed_dataset(data.records.test, embedder));
    });
  }
  PipelineResult r{stage("train", [&] { return train(data.train, data.val_good, cfg.train); }),
                   {}, {}, {}, {}, {}, {}, {}};
  r.calibration = stage("calibrate", [&] {
    return calibrate(score_all(r.trained.model, data.val), labels_of(data.val));
  });
  stage("eval", [&] {
    r.test_parts = score_all(r.trained.model, data.test);
    for (const auto& p : r.test_parts) r.test_scores.push_back(fuse(p, r.calibration));
    r.test = evaluate_scores(r.test_scores, r.calibration.threshold, r.calibration.beta,
                             data.test);
  });
  r.baselines = stage("baselines", [&] { return run_baselines(data, cfg); });
  if (out_dir) {
    stage("write-artifacts", [&] {
      save_checkpoint(r.trained.model, *out_dir / "model.json");
      write_file(*out_dir / "history.csv", r.trained.history.to_csv());
      save_calibration(r.calibration, *out_dir / "calibration.json");
      write_file(*out_dir / "scores.jsonl",
                 scores_jsonl(data.test, r.test_parts, r.calibration));
      write_json(*out_dir / "report.json", r.report(cfg));
    });
  }
  if (cfg.bench) {
    stage("bench", [&] {
      r.score_latency = bench_latency(r.trained.model, r.calibration, data.test,
                                      cfg.bench_warmup, cfg.bench_reps);
      const HashEmbedder embedder(cfg.embed_dim, cfg.embed_seed);
      r.embed_latency = bench_embed_and_score(r.trained.model, r.calibration, embedder,
                                              data.records.test, cfg.bench_warmup,
                                              cfg.bench_reps);
      if (out_dir)
        write_json(*out_dir / "bench.json",
                   Json{{"score_only", r.score_latency->to_json()},
                        {"embed_and_score", r.embed_latency->to_json()}});
    });
  }
  return r;
}

}  // namespace seqguard
