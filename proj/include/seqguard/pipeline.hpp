// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiment: toy corpus, anomaly synthesis, hash embeddings,
// training, calibration, evaluation against the baselines, and latency.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seqguard/baselines.hpp"
#include "seqguard/bench.hpp"
#include "seqguard/metrics.hpp"
#include "seqguard/synth.hpp"
#include "seqguard/train.hpp"

namespace seqguard {

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t n_good = 500;
  int domains = 8;
  /// Share of good records held out (with their anomalies) for testing.
  double test_fraction = 0.2;
  int embed_dim = kDefaultEmbeddingDim;
  std::uint64_t embed_seed = 0;
  SynthConfig synth;
  TrainConfig train;
  std::size_t iforest_trees = 100;
  std::size_t iforest_subsample = 256;
  bool bench = true;
  std::size_t bench_warmup = 50;
  std::size_t bench_reps = 1000;

  void validate() const;
};

/// Keys mirror the fields; "synth" and "train" are nested objects. The
/// synth and train seeds default to the top-level seed.
PipelineConfig pipeline_config_from_json(const Json& doc);
Json to_json(const PipelineConfig& cfg);

struct DataSplits {
  std::vector<TrajectoryRecord> train;  // good only
  std::vector<TrajectoryRecord> val;    // goods, then their anomalies
  std::vector<TrajectoryRecord> test;   // goods, then their anomalies
};

DataSplits make_splits(const PipelineConfig& cfg);

struct ExperimentData {
  DataSplits records;
  std::vector<Example> train;
  std::vector<Example> val;
  std::vector<Example> val_good;
  std::vector<Example> test;
};

ExperimentData prepare_experiment(const PipelineConfig& cfg);

/// A single-score detector calibrated on validation and evaluated on test.
struct DetectorResult {
  std::string name;
  double threshold = 0.0;
  double val_f1 = 0.0;
  EvalReport test;
};

/// Lengths and sources of `examples`, for bucketed metrics.
EvalReport evaluate_scores(const std::vector<double>& scores, double threshold,
                           double beta, const std::vector<Example>& examples);

/// Isolation Forest and centroid detectors on mean-pooled trajectories,
/// fitted on the training goods.
std::vector<DetectorResult> run_baselines(const ExperimentData& data,
                                          const PipelineConfig& cfg);

struct PipelineResult {
  TrainResult trained;
  CalibrationArtifact calibration;
  std::vector<ScoreParts> test_parts;
  std::vector<double> test_scores;
  EvalReport test;
  std::vector<DetectorResult> baselines;
  std::optional<LatencyReport> score_latency;
  std::optional<LatencyReport> embed_latency;

  /// Everything but timings, so it is reproducible byte for byte.
  Json report(const PipelineConfig& cfg) const;
};

/// Runs every stage and, when `out_dir` is set, writes train/val/test
/// datasets, embeddings, model.json, history.csv, calibration.json,
/// scores.jsonl, report.json and bench.json. A failing stage rethrows its
/// error with the stage name prefixed.
PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::optional<std::filesystem::path>& out_dir);

/// One JSON line per example: id, label, score parts, fused score and
/// prediction.
std::string scores_jsonl(const std::vector<Example>& examples,
                         const std::vector<ScoreParts>& parts,
                         const CalibrationArtifact& cal);

}  // namespace seqguard
