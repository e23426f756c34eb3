// SPDX-License-Identifier: Apache-2.0
#include "seqguard/train.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

namespace seqguard {

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::hybrid: return "hybrid";
    case Ablation::contrastive_only: return "contrastive_only";
    case Ablation::reconstruction_only: return "reconstruction_only";
  }
  return "hybrid";
}

Ablation parse_ablation(std::string_view text) {
  if (text == "hybrid") return Ablation::hybrid;
  if (text == "contrastive_only") return Ablation::contrastive_only;
  if (text == "reconstruction_only") return Ablation::reconstruction_only;
  throw FormatError("unknown ablation '" + std::string(text) +
                          "' (expected hybrid, contrastive_only, reconstruction_only)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw PreconditionError("train config: " + what); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr must be finite and >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
  if (!(margin >= 0.0) || !std::isfinite(margin)) fail("margin must be finite and >= 0");
  if (patience < 1) fail("patience must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("val_fraction must be in (0, 1)");
  if (!(clip_norm > 0.0)) fail("clip_norm must be > 0");
  if (h_mid < 1 || latent < 1) fail("h_mid and latent must be >= 1");
}

TrainConfig train_config_from_json(const Json& doc) {
  if (!doc.is_object()) throw FormatError("train config must be a JSON object");
  static const std::set<std::string> known = {
      "epochs", "batch_size", "lr", "alpha", "margin", "seed", "patience",
      "val_fraction", "ablation", "clip_norm", "h_mid", "latent"};
  for (const auto& [key, _] : doc.items())
    if (!known.contains(key)) throw FormatError("train config: unknown key '" + key + "'");
  TrainConfig cfg;
  try {
    if (doc.contains("epochs")) cfg.epochs = doc["epochs"].get<int>();
    if (doc.contains("batch_size")) cfg.batch_size = doc["batch_size"].get<int>();
    if (doc.contains("lr")) cfg.lr = doc["lr"].get<double>();
    if (doc.contains("alpha")) cfg.alpha = doc["alpha"].get<double>();
    if (doc.contains("margin")) cfg.margin = doc["margin"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("patience")) cfg.patience = doc["patience"].get<int>();
    if (doc.contains("val_fraction")) cfg.val_fraction = doc["val_fraction"].get<double>();
    if (doc.contains("ablation"))
      cfg.ablation = parse_ablation(doc["ablation"].get<std::string>());
    if (doc.contains("clip_norm")) cfg.clip_norm = doc["clip_norm"].get<double>();
    if (doc.contains("h_mid")) cfg.h_mid = doc["h_mid"].get<int>();
    if (doc.contains("latent")) cfg.latent = doc["latent"].get<int>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json to_json(const TrainConfig& cfg) {
  return Json{{"epochs", cfg.epochs},       {"batch_size", cfg.batch_size},
              {"lr", cfg.lr},               {"alpha", cfg.alpha},
              {"margin", cfg.margin},       {"seed", cfg.seed},
              {"patience", cfg.patience},   {"val_fraction", cfg.val_fraction},
              {"ablation", to_string(cfg.ablation)},
              {"clip_norm", cfg.clip_norm}, {"h_mid", cfg.h_mid},
              {"latent", cfg.latent}};
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return train_config_from_json(read_json(path));
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_lc,train_lr,train_total,val_total\n";
  char line[256];
  for (std::size_t e = 0; e < train.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", e + 1,
                  train[e].l_contrastive, train[e].l_reconstruction, train[e].l_total,
                  e < val.size() ? val[e].l_total : 0.0);
    out += line;
  }
  return out;
}

LossBreakdown batch_loss(const GuardModel& m, const std::vector<const Example*>& batch,
                         const TrainConfig& cfg, GuardModel* grad) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n < 2) throw PreconditionError("batch_loss: batch needs at least 2 samples");
  const bool use_contrastive = cfg.ablation != Ablation::reconstruction_only;
  const bool use_recon = cfg.ablation != Ablation::contrastive_only;

  std::vector<SampleTrace> traces;
  traces.reserve(batch.size());
  Matrix v_t(n, m.dims.l), v_s(n, m.dims.l);
  Eigen::Index max_len = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Example& ex = *batch[static_cast<std::size_t>(i)];
    traces.push_back(forward_sample(m, ex.task, ex.steps, use_recon));
    v_t.row(i) = traces.back().v_t.transpose();
    v_s.row(i) = traces.back().v_s.transpose();
    max_len = std::max(max_len, ex.steps.rows());
  }

  const bool want_grad = grad != nullptr;
  Matrix d_vt = Matrix::Zero(n, m.dims.l), d_vs = Matrix::Zero(n, m.dims.l);
  double lc = 0.0;
  if (use_contrastive)
    lc = triplet_inbatch(v_t, v_s, cfg.margin, want_grad ? &d_vt : nullptr,
                         want_grad ? &d_vs : nullptr);

  double lr = 0.0;
  std::vector<Matrix> d_recon;
  if (use_recon) {
    std::vector<Matrix> recon, target;
    std::vector<Eigen::Index> lengths;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Example& ex = *batch[static_cast<std::size_t>(i)];
      const Eigen::Index len = ex.steps.rows();
      Matrix r = Matrix::Zero(max_len, m.dims.d), t = Matrix::Zero(max_len, m.dims.d);
      r.topRows(len) = traces[static_cast<std::size_t>(i)].recon;
      t.topRows(len) = ex.steps;
      recon.push_back(std::move(r));
      target.push_back(std::move(t));
      lengths.push_back(len);
    }
    lr = recon_mse(recon, target, lengths, want_grad ? &d_recon : nullptr);
  }

  const LossBreakdown out = cfg.ablation == Ablation::reconstruction_only
                                ? LossBreakdown::make(0.0, lr, cfg.alpha)
                            : cfg.ablation == Ablation::contrastive_only
                                ? LossBreakdown::make(lc, 0.0, 0.0)
                                : LossBreakdown::make(lc, lr, cfg.alpha);
  if (want_grad) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Example& ex = *batch[static_cast<std::size_t>(i)];
      const Vector g_vt = d_vt.row(i).transpose(), g_vs = d_vs.row(i).transpose();
      if (use_recon) {
        const Matrix g_recon =
            cfg.alpha * d_recon[static_cast<std::size_t>(i)].topRows(ex.steps.rows());
        backward_sample(m, traces[static_cast<std::size_t>(i)], ex.steps, g_vt, g_vs,
                        &g_recon, *grad);
      } else {
        backward_sample(m, traces[static_cast<std::size_t>(i)], ex.steps, g_vt, g_vs,
                        nullptr, *grad);
      }
    }
  }
  return out;
}

namespace {

std::vector<std::vector<const Example*>> fixed_batches(const std::vector<Example>& set,
                                                       int batch_size) {
  std::vector<std::vector<const Example*>> batches;
  for (std::size_t i = 0; i < set.size(); i += static_cast<std::size_t>(batch_size)) {
    std::vector<const Example*> b;
    for (std::size_t j = i; j < std::min(set.size(), i + static_cast<std::size_t>(batch_size)); ++j)
      b.push_back(&set[j]);
    if (b.size() < 2 && !batches.empty())
      batches.back().insert(batches.back().end(), b.begin(), b.end());
    else
      batches.push_back(std::move(b));
  }
  return batches;
}

LossBreakdown mean_of(const std::vector<LossBreakdown>& parts, double alpha) {
  double lc = 0.0, lr = 0.0;
  for (const auto& p : parts) {
    lc += p.l_contrastive;
    lr += p.l_reconstruction;
  }
  const double n = static_cast<double>(parts.size());
  return LossBreakdown::make(lc / n, lr / n, alpha);
}

double effective_alpha(const TrainConfig& cfg) {
  return cfg.ablation == Ablation::contrastive_only ? 0.0 : cfg.alpha;
}

void require_finite_loss(const LossBreakdown& l, const std::string& where) {
  if (!std::isfinite(l.l_total))
    throw NumericError(where + ": non-finite loss (contrastive " +
                       std::to_string(l.l_contrastive) + ", reconstruction " +
                       std::to_string(l.l_reconstruction) + ")");
}

}  // namespace

LossBreakdown evaluation_loss(const GuardModel& m, const std::vector<Example>& set,
                              const TrainConfig& cfg) {
  if (set.size() < 2) throw PreconditionError("evaluation_loss: need at least 2 samples");
  std::vector<LossBreakdown> parts;
  for (const auto& b : fixed_batches(set, cfg.batch_size))
    parts.push_back(batch_loss(m, b, cfg));
  return mean_of(parts, effective_alpha(cfg));
}

TrainResult train(const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.size() < static_cast<std::size_t>(cfg.batch_size))
    throw PreconditionError("train: " + std::to_string(train_set.size()) +
                            " training samples is less than one batch of " +
                            std::to_string(cfg.batch_size));
  if (val_set.size() < 2)
    throw PreconditionError("train: validation set needs at least 2 samples");
  for (const auto* set : {&train_set, &val_set})
    for (const auto& ex : *set)
      if (ex.label != Label::good)
        throw PreconditionError("train: record '" + ex.id +
                                "' is not labeled good; training uses good trajectories only");
  const Eigen::Index d = train_set.front().task.size();
  const ModelDims dims{static_cast<int>(d), cfg.h_mid, cfg.latent};

  TrainResult result{GuardModel::initialized(dims, cfg.seed), {}};
  GuardModel& model = result.model;
  Vector theta = model.flatten();
  Vector best_theta = theta;
  AdamState adam = AdamState::zeros(theta.size());
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;

  Rng order_rng = Rng(cfg.seed).split("batch-order");
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const double alpha_eff = effective_alpha(cfg);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    std::vector<LossBreakdown> parts;
    for (std::size_t start = 0; start + 2 <= order.size(); start += bs) {
      std::vector<const Example*> batch;
      for (std::size_t j = start; j < std::min(order.size(), start + bs); ++j)
        batch.push_back(&train_set[order[j]]);
      if (batch.size() < 2) break;
      GuardModel grad = GuardModel::zeros(dims);
      const LossBreakdown l = batch_loss(model, batch, cfg, &grad);
      require_finite_loss(l, "train epoch " + std::to_string(epoch + 1) + " batch " +
                                 std::to_string(start / bs + 1));
      parts.push_back(l);
      if (hooks.on_gradient) hooks.on_gradient(grad);
      Vector g = grad.flatten();
      clip_global_norm(g, cfg.clip_norm);
      adam_update(theta, g, adam, adam_cfg);
      model.assign(theta);
    }
    result.history.train.push_back(mean_of(parts, alpha_eff));
    LossBreakdown val = evaluation_loss(model, val_set, cfg);
    if (hooks.on_validation) hooks.on_validation(epoch, val);
    require_finite_loss(val, "validation epoch " + std::to_string(epoch + 1));
    result.history.val.push_back(val);
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model);
    if (val.l_total < best_val) {
      best_val = val.l_total;
      best_theta = theta;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.assign(best_theta);
  model.round_to_f32();
  return result;
}

double ablation_score(Ablation a, const CalibrationArtifact& cal, const ScoreParts& p) {
  switch (a) {
    case Ablation::contrastive_only: return p.d_contrastive;
    case Ablation::reconstruction_only: return p.e_recon;
    case Ablation::hybrid: break;
  }
  return fuse(p, cal);
}

std::vector<AblationRow> run_ablation(const std::vector<Example>& train_set,
                                      const std::vector<Example>& val_set,
                                      const TrainConfig& base) {
  const std::vector<Example> val_good = filter_label(val_set, Label::good);
  const std::vector<Label> val_labels = labels_of(val_set);
  std::vector<AblationRow> rows;
  for (Ablation a : {Ablation::hybrid, Ablation::contrastive_only,
                     Ablation::reconstruction_only}) {
    TrainConfig cfg = base;
    cfg.ablation = a;
    TrainResult r = train(train_set, val_good, cfg);
    const std::vector<ScoreParts> parts = score_all(r.model, val_set);
    CalibrationArtifact cal = calibrate(parts, val_labels);
    std::vector<double> single;
    for (const auto& p : parts) single.push_back(ablation_score(a, cal, p));
    const double signal_f1 = sweep_threshold(single, val_labels).f1;
    rows.push_back(
        {a, cfg, cal.val_f1, signal_f1, cal, std::move(r.history), std::move(r.model)});
  }
  return rows;
}

}  // namespace seqguard
