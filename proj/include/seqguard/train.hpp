// SPDX-License-Identifier: Apache-2.0
//
// Training loop for the hybrid objective: seeded shuffling, padded
// mini-batches, gradient clipping, Adam, and early stopping on the
// validation total loss.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "seqguard/dataset.hpp"
#include "seqguard/error.hpp"
#include "seqguard/loss.hpp"
#include "seqguard/model.hpp"
#include "seqguard/score.hpp"

namespace seqguard {

enum class Ablation { hybrid, contrastive_only, reconstruction_only };

std::string_view to_string(Ablation a);
/// Throws PreconditionError on an unknown name.
Ablation parse_ablation(std::string_view text);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  double lr = 2e-5;
  double alpha = 0.5;
  double margin = 1.0;
  std::uint64_t seed = 0;
  int patience = 5;
  double val_fraction = 0.15;
  Ablation ablation = Ablation::hybrid;
  double clip_norm = 5.0;
  int h_mid = 256;
  int latent = 128;

  /// Throws PreconditionError naming the offending field.
  void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
TrainConfig train_config_from_json(const Json& doc);
Json to_json(const TrainConfig& cfg);
TrainConfig load_train_config(const std::filesystem::path& path);

struct TrainHistory {
  std::vector<LossBreakdown> train;
  std::vector<LossBreakdown> val;
  int best_epoch = -1;  // 0-based index into `val`

  /// Header: epoch,train_lc,train_lr,train_total,val_total
  std::string to_csv() const;
};

/// Seeded shuffle, then the last round(n · val_fraction) items form the
/// validation side. Throws PreconditionError when either side is empty.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split_train_val(const std::vector<T>& records,
                                                          double val_fraction,
                                                          std::uint64_t seed) {
  if (records.empty()) throw PreconditionError("split_train_val: no records");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw PreconditionError("split_train_val: val_fraction must be in (0, 1)");
  const auto n_val = static_cast<std::size_t>(
      std::llround(static_cast<double>(records.size()) * val_fraction));
  if (n_val == 0 || n_val >= records.size())
    throw PreconditionError("split_train_val: fraction " + std::to_string(val_fraction) +
                            " of " + std::to_string(records.size()) +
                            " records leaves one side empty");
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng(seed).split("train-val-split");
  rng.shuffle(order);
  std::pair<std::vector<T>, std::vector<T>> out;
  const std::size_t n_train = records.size() - n_val;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? out.first : out.second).push_back(records[order[i]]);
  return out;
}

/// Loss over one batch per cfg.ablation. When `grad` is non-null it must
/// be shaped like `m` and receives the gradient of l_total (accumulated).
/// Step sequences are padded to the batch maximum for the reconstruction
/// term; the encoder only runs over each sample's real steps.
LossBreakdown batch_loss(const GuardModel& m, const std::vector<const Example*>& batch,
                         const TrainConfig& cfg, GuardModel* grad = nullptr);

/// Mean loss over fixed-order batches of cfg.batch_size; a trailing batch
/// of one sample is merged into the previous batch.
LossBreakdown evaluation_loss(const GuardModel& m, const std::vector<Example>& set,
                              const TrainConfig& cfg);

struct TrainHooks {
  /// Called after each epoch's validation pass; may overwrite the loss.
  std::function<void(int epoch, LossBreakdown& val)> on_validation;
  std::function<void(int epoch, const GuardModel& current)> on_epoch_end;
  /// Sees the raw (unclipped) gradient of every step.
  std::function<void(const GuardModel& grad)> on_gradient;
};

struct TrainResult {
  GuardModel model;
  TrainHistory history;
};

/// Returns the best-epoch parameters rounded to 32-bit precision, so the
/// model scores identically after a checkpoint round trip.
/// Throws PreconditionError unless every record is good, the training set
/// holds at least one full batch and the validation set at least 2
/// samples; NumericError on a non-finite loss.
TrainResult train(const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

struct AblationRow {
  Ablation ablation;
  TrainConfig cfg;
  /// Validation F1 of the calibrated fused score.
  double val_f1 = 0.0;
  /// Validation F1 of the trained signal alone (see ablation_score).
  double signal_f1 = 0.0;
  CalibrationArtifact calibration;
  TrainHistory history;
  GuardModel model;
};

/// The fused score for hybrid; otherwise only the signal the ablation
/// trained (raw distance or raw reconstruction error).
double ablation_score(Ablation a, const CalibrationArtifact& cal, const ScoreParts& p);

/// Trains each configuration with the shared seed; early stopping uses the
/// good part of `val_set` and calibration the whole labeled `val_set`.
std::vector<AblationRow> run_ablation(const std::vector<Example>& train_set,
                                      const std::vector<Example>& val_set,
                                      const TrainConfig& base);

}  // namespace seqguard
