// SPDX-License-Identifier: Apache-2.0
//
// seqguard command-line interface. Every subcommand reads and writes the
// JSON/JSONL formats of the library; failures print
//   {"error": {"kind": ..., "message": ...}}
// on stderr and exit nonzero.
#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "seqguard/bench.hpp"
#include "seqguard/error.hpp"
#include "seqguard/pipeline.hpp"

using namespace seqguard;

namespace {

std::pair<int, int> parse_k_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int k = std::stoi(text);
      return {k, k};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw PreconditionError("--contextual-k expects N or A..B, got '" + text + "'");
  }
}

/// Step vectors from an external encoder, keyed by exact text.
class FileEmbedder final : public EmbeddingProvider {
 public:
  explicit FileEmbedder(const std::filesystem::path& path) {
    for_each_jsonl(path, [&](const Json& doc, std::size_t line) {
      if (!doc.is_object() || !doc.contains("text") || !doc.contains("vec"))
        throw FormatError("vector file entries need \"text\" and \"vec\"", line);
      const auto& values = doc["vec"];
      Vector v(static_cast<Eigen::Index>(values.size()));
      for (std::size_t i = 0; i < values.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = values[i].get<double>();
      if (dim_ == 0) dim_ = static_cast<int>(v.size());
      if (v.size() != dim_)
        throw FormatError("vector has " + std::to_string(v.size()) + " dims, expected " +
                              std::to_string(dim_),
                          line);
      vectors_[doc["text"].get<std::string>()] = std::move(v);
    });
    if (dim_ == 0) throw FormatError(path.string() + ": no vectors");
  }
  int dim() const override { return dim_; }
  Vector embed(std::string_view text) const override {
    const auto it = vectors_.find(std::string(text));
    if (it == vectors_.end())
      throw PreconditionError("no vector for text '" + std::string(text) + "'");
    return it->second;
  }

 private:
  int dim_ = 0;
  std::map<std::string, Vector> vectors_;
};

std::vector<Example> load_examples(const std::string& emb_path, const std::string& labels_path) {
  const auto records = read_dataset(labels_path);
  return join_examples(records, align_embeddings(records, load_embeddings(emb_path)));
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqguard: trajectory anomaly detection"};
  app.require_subcommand(1);

  // gen
  std::size_t gen_n = 500;
  int gen_domains = 8;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a toy corpus of good trajectories");
  gen->add_option("--n", gen_n, "Number of records");
  gen->add_option("--domains", gen_domains, "Number of built-in domains to use");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output dataset JSONL")->required();

  // synth
  std::string synth_in, synth_out, synth_k = "1..3";
  SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "Add one synthesized anomaly per good record");
  synth->add_option("--in", synth_in, "Good records JSONL")->required();
  synth->add_option("--out", synth_out, "Output dataset JSONL")->required();
  synth->add_option("--seed", synth_cfg.seed, "Random seed");
  synth->add_option("--contextual-k", synth_k, "Injected steps: N or A..B within 1..3");
  synth->add_option("--structural-frac", synth_cfg.structural_frac,
                    "Share of structural anomalies");

  // embed
  std::string embed_in, embed_out, embed_provider = "hash", embed_vectors;
  int embed_dim = kDefaultEmbeddingDim;
  std::uint64_t embed_seed = 0;
  auto* embed = app.add_subcommand("embed", "Embed task and step strings");
  embed->add_option("--in", embed_in, "Dataset JSONL")->required();
  embed->add_option("--out", embed_out, "Embedding JSONL")->required();
  embed->add_option("--provider", embed_provider, "hash or file")
      ->check(CLI::IsMember({"hash", "file"}));
  embed->add_option("--dim", embed_dim, "Hash embedding dimension");
  embed->add_option("--seed", embed_seed, "Hash embedding seed");
  embed->add_option("--vectors", embed_vectors,
                    "For --provider file: JSONL of {\"text\", \"vec\"}");

  // train
  std::string train_data, train_labels, train_config, train_out, train_history, train_ablation;
  auto* trn = app.add_subcommand("train", "Train a model on good trajectories");
  trn->add_option("--data", train_data, "Embedding JSONL")->required();
  trn->add_option("--labels", train_labels, "Dataset JSONL")->required();
  trn->add_option("--config", train_config, "Train config JSON");
  trn->add_option("--out", train_out, "Model checkpoint JSON")->required();
  trn->add_option("--history", train_history, "History CSV");
  trn->add_option("--ablation", train_ablation,
                  "hybrid, contrastive_only or reconstruction_only");

  // calibrate
  std::string cal_model, cal_val, cal_labels, cal_out;
  auto* cal = app.add_subcommand("calibrate", "Fit fusion weight and threshold on validation");
  cal->add_option("--model", cal_model, "Model checkpoint")->required();
  cal->add_option("--val", cal_val, "Validation embedding JSONL")->required();
  cal->add_option("--labels", cal_labels, "Validation dataset JSONL")->required();
  cal->add_option("--out", cal_out, "Calibration JSON")->required();

  // score
  std::string score_model, score_cal, score_in, score_labels, score_out;
  auto* score = app.add_subcommand("score", "Score trajectories");
  score->add_option("--model", score_model, "Model checkpoint")->required();
  score->add_option("--calibration", score_cal, "Calibration JSON")->required();
  score->add_option("--in", score_in, "Embedding JSONL")->required();
  score->add_option("--labels", score_labels, "Dataset JSONL fixing record order");
  score->add_option("--out", score_out, "Scores JSONL")->required();

  // eval
  std::string eval_scores, eval_labels, eval_out;
  auto* eval = app.add_subcommand("eval", "Metrics of scored predictions");
  eval->add_option("--scores", eval_scores, "Scores JSONL")->required();
  eval->add_option("--labels", eval_labels, "Dataset JSONL")->required();
  eval->add_option("--out", eval_out, "Report JSON (stdout when omitted)");

  // bench
  std::string bench_model, bench_cal, bench_in, bench_labels, bench_out;
  std::size_t bench_reps = 1000, bench_warmup = 50;
  auto* bench = app.add_subcommand("bench", "Per-sample scoring latency");
  bench->add_option("--model", bench_model, "Model checkpoint")->required();
  bench->add_option("--calibration", bench_cal, "Calibration JSON")->required();
  bench->add_option("--in", bench_in, "Embedding JSONL")->required();
  bench->add_option("--labels", bench_labels,
                    "Dataset JSONL; adds an embed+score run with the hash embedder");
  bench->add_option("--reps", bench_reps, "Timed repetitions (>= 100)");
  bench->add_option("--warmup", bench_warmup, "Untimed warmup calls");
  bench->add_option("--out", bench_out, "Report JSON (stdout when omitted)");

  // pipeline
  std::string pipe_config, pipe_out;
  std::optional<std::uint64_t> pipe_seed;
  auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  pipe->add_option("--config", pipe_config, "Pipeline config JSON");
  pipe->add_option("--seed", pipe_seed, "Override the config seed");
  pipe->add_option("--out", pipe_out, "Output directory")->required();

  // ablation
  std::string abl_config, abl_out;
  auto* abl = app.add_subcommand("ablation", "Hybrid vs single-loss training");
  abl->add_option("--config", abl_config, "Pipeline config JSON");
  abl->add_option("--out", abl_out, "Report JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  auto emit = [](const std::string& path, const Json& doc) {
    if (path.empty())
      std::cout << doc.dump(2) << "\n";
    else
      write_json(path, doc);
  };

  try {
    if (gen->parsed()) {
      Rng rng(gen_seed);
      write_dataset(gen_out, gen_toy_corpus(gen_n, gen_domains, rng));
    } else if (synth->parsed()) {
      std::tie(synth_cfg.k_min, synth_cfg.k_max) = parse_k_range(synth_k);
      if (synth_cfg.k_min < 1 || synth_cfg.k_max > 3 || synth_cfg.k_min > synth_cfg.k_max)
        throw PreconditionError("--contextual-k must lie within 1..3");
      auto records = read_dataset(synth_in);
      const auto anomalies = synthesize_anomalies(records, synth_cfg, builtin_step_pool());
      records.insert(records.end(), anomalies.begin(), anomalies.end());
      write_dataset(synth_out, records);
    } else if (embed->parsed()) {
      std::unique_ptr<EmbeddingProvider> provider;
      if (embed_provider == "file") {
        if (embed_vectors.empty())
          throw PreconditionError("--provider file needs --vectors");
        provider = std::make_unique<FileEmbedder>(embed_vectors);
      } else {
        provider = std::make_unique<HashEmbedder>(embed_dim, embed_seed);
      }
      save_embeddings(embed_out, embed_dataset(read_dataset(embed_in), *provider));
    } else if (trn->parsed()) {
      TrainConfig cfg = train_config.empty() ? TrainConfig{} : load_train_config(train_config);
      if (!train_ablation.empty()) cfg.ablation = parse_ablation(train_ablation);
      const auto all = load_examples(train_data, train_labels);
      const auto goods = filter_label(all, Label::good);
      if (goods.size() != all.size())
        std::cerr << "note: training on the " << goods.size() << " good records of "
                  << all.size() << "\n";
      auto [tr, va] = split_train_val(goods, cfg.val_fraction, cfg.seed);
      const TrainResult r = train(tr, va, cfg);
      save_checkpoint(r.model, train_out);
      if (!train_history.empty()) write_file(train_history, r.history.to_csv());
    } else if (cal->parsed()) {
      const GuardModel m = load_checkpoint(cal_model);
      const auto val = load_examples(cal_val, cal_labels);
      save_calibration(calibrate(score_all(m, val), labels_of(val)), cal_out);
    } else if (score->parsed()) {
      const GuardModel m = load_checkpoint(score_model);
      const CalibrationArtifact c = load_calibration(score_cal);
      std::vector<Example> examples;
      if (!score_labels.empty()) {
        examples = load_examples(score_in, score_labels);
      } else {
        for (const auto& e : load_embeddings(score_in))
          examples.push_back({e.id, e.task, clamp_steps(e.steps, e.id), Label::good, ""});
      }
      write_file(score_out, scores_jsonl(examples, score_all(m, examples), c));
    } else if (eval->parsed()) {
      const auto records = read_dataset(eval_labels);
      std::map<std::string, const TrajectoryRecord*> by_id;
      for (const auto& r : records) by_id[r.id] = &r;
      std::vector<Label> preds, labels;
      std::vector<std::size_t> lengths;
      std::vector<std::string> sources;
      for_each_jsonl(eval_scores, [&](const Json& doc, std::size_t line) {
        const auto id = doc.at("id").get<std::string>();
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw FormatError("score for unknown id '" + id + "'", line);
        preds.push_back(parse_label(doc.at("prediction").get<std::string>()));
        labels.push_back(it->second->label);
        lengths.push_back(it->second->steps.size());
        sources.push_back(it->second->source);
      });
      emit(eval_out, compute_metrics(preds, labels, lengths, sources).to_json());
    } else if (bench->parsed()) {
      const GuardModel m = load_checkpoint(bench_model);
      const CalibrationArtifact c = load_calibration(bench_cal);
      std::vector<Example> examples;
      for (const auto& e : load_embeddings(bench_in))
        examples.push_back({e.id, e.task, clamp_steps(e.steps, e.id), Label::good, ""});
      Json out{{"score_only", bench_latency(m, c, examples, bench_warmup, bench_reps).to_json()}};
      if (!bench_labels.empty()) {
        const HashEmbedder embedder(m.dims.d, 0);
        out["embed_and_score"] = bench_embed_and_score(m, c, embedder, read_dataset(bench_labels),
                                                       bench_warmup, bench_reps)
                                     .to_json();
      }
      emit(bench_out, out);
    } else if (pipe->parsed()) {
      Json doc = pipe_config.empty() ? Json::object() : read_json(pipe_config);
      if (pipe_seed) doc["seed"] = *pipe_seed;
      const PipelineConfig cfg = pipeline_config_from_json(doc);
      const PipelineResult r = run_pipeline(cfg, std::filesystem::path(pipe_out));
      std::cout << Json{{"test_anomaly_f1", r.test.anomaly.f1},
                        {"val_f1", r.calibration.val_f1},
                        {"out", pipe_out}}
                       .dump()
                << "\n";
    } else if (abl->parsed()) {
      const PipelineConfig cfg = pipeline_config_from_json(
          abl_config.empty() ? Json::object() : read_json(abl_config));
      const ExperimentData data = prepare_experiment(cfg);
      Json rows = Json::array();
      for (const auto& row : run_ablation(data.train, data.val, cfg.train))
        rows.push_back(Json{{"ablation", to_string(row.ablation)},
                            {"val_f1", row.val_f1},
                            {"signal_f1", row.signal_f1},
                            {"beta", row.calibration.beta},
                            {"best_epoch", row.history.best_epoch + 1}});
      emit(abl_out, Json{{"config", to_json(cfg)}, {"rows", rows}});
    }
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
