// SPDX-License-Identifier: Apache-2.0
#include "seqguard/score.hpp"

#include <algorithm>
#include <numeric>

#include "seqguard/error.hpp"
#include "seqguard/io.hpp"
#include "seqguard/metrics.hpp"

namespace seqguard {

ScoreParts score_parts(const GuardModel& m, const Vector& task_vec,
                       const Eigen::Ref<const Matrix>& step_vecs) {
  const Vector v_t = encode_task(task_vec, m);
  const Vector v_s = encode_trajectory(step_vecs, m);
  const Matrix recon = decode_trajectory(v_s, step_vecs, m);
  ScoreParts parts;
  parts.d_contrastive = (v_t - v_s).norm();
  parts.e_recon = (recon - step_vecs).squaredNorm() /
                  static_cast<double>(step_vecs.rows() * step_vecs.cols());
  if (!std::isfinite(parts.d_contrastive) || !std::isfinite(parts.e_recon))
    throw NumericError("score_parts: non-finite score");
  return parts;
}

std::vector<ScoreParts> score_all(const GuardModel& m,
                                  const std::vector<Example>& examples) {
  std::vector<ScoreParts> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(score_parts(m, ex.task, ex.steps));
  return out;
}

double fuse(const ScoreParts& parts, const CalibrationArtifact& cal) {
  const double z_c = (parts.d_contrastive - cal.mu_c) / cal.sigma_c;
  const double z_r = (parts.e_recon - cal.mu_r) / cal.sigma_r;
  return z_c + cal.beta * z_r;
}

namespace {

void require_both_labels(std::span<const Label> labels, const char* where) {
  const bool has_good = std::find(labels.begin(), labels.end(), Label::good) != labels.end();
  const bool has_anom =
      std::find(labels.begin(), labels.end(), Label::anomaly) != labels.end();
  if (!has_good || !has_anom)
    throw PreconditionError(std::string(where) +
                            ": validation set must contain both labels");
}

}  // namespace

ThresholdChoice sweep_threshold(std::span<const double> scores,
                                std::span<const Label> labels) {
  if (scores.size() != labels.size())
    throw DimensionError("sweep_threshold: " + std::to_string(scores.size()) +
                         " scores vs " + std::to_string(labels.size()) + " labels");
  require_both_labels(labels, "sweep_threshold");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> sorted(n);
  // anomalies_from[i]: anomaly count among sorted positions i..n-1.
  std::vector<std::size_t> anomalies_from(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = scores[order[i]];
  for (std::size_t i = n; i-- > 0;)
    anomalies_from[i] =
        anomalies_from[i + 1] + (labels[order[i]] == Label::anomaly ? 1 : 0);
  const std::size_t total_anomalies = anomalies_from[0];

  auto evaluate = [&](double threshold) {
    // Everything strictly above the threshold is flagged.
    const auto first = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin());
    Confusion c;
    c.tp = anomalies_from[first];
    c.fp = (n - first) - c.tp;
    c.fn = total_anomalies - c.tp;
    c.tn = first - c.fn;
    return anomaly_f1(c);
  };

  ThresholdChoice best{sorted.front() - 1.0, evaluate(sorted.front() - 1.0)};
  for (std::size_t i = 1; i < n; ++i) {
    const double t = (sorted[i - 1] + sorted[i]) / 2.0;
    const double f1 = evaluate(t);
    if (f1 > best.f1) best = {t, f1};
  }
  return best;
}

void fit_normalization(std::span<const ScoreParts> parts,
                       std::span<const Label> labels, CalibrationArtifact& cal) {
  double sum_c = 0.0, sum_r = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (labels[i] != Label::good) continue;
    sum_c += parts[i].d_contrastive;
    sum_r += parts[i].e_recon;
    ++n;
  }
  if (n == 0) throw PreconditionError("fit_normalization: no good samples");
  cal.mu_c = sum_c / static_cast<double>(n);
  cal.mu_r = sum_r / static_cast<double>(n);
  double var_c = 0.0, var_r = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (labels[i] != Label::good) continue;
    var_c += (parts[i].d_contrastive - cal.mu_c) * (parts[i].d_contrastive - cal.mu_c);
    var_r += (parts[i].e_recon - cal.mu_r) * (parts[i].e_recon - cal.mu_r);
  }
  cal.sigma_c = std::max(std::sqrt(var_c / static_cast<double>(n)), kSigmaFloor);
  cal.sigma_r = std::max(std::sqrt(var_r / static_cast<double>(n)), kSigmaFloor);
}

CalibrationArtifact calibrate(std::span<const ScoreParts> parts,
                              std::span<const Label> labels,
                              std::span<const double> beta_grid) {
  if (parts.size() != labels.size())
    throw DimensionError("calibrate: " + std::to_string(parts.size()) +
                         " scores vs " + std::to_string(labels.size()) + " labels");
  require_both_labels(labels, "calibrate");
  if (beta_grid.empty()) throw PreconditionError("calibrate: empty beta grid");
  std::vector<double> betas(beta_grid.begin(), beta_grid.end());
  std::sort(betas.begin(), betas.end());

  CalibrationArtifact cal;
  fit_normalization(parts, labels, cal);
  bool have_best = false;
  CalibrationArtifact best = cal;
  std::vector<double> fused(parts.size());
  for (double beta : betas) {
    cal.beta = beta;
    for (std::size_t i = 0; i < parts.size(); ++i) fused[i] = fuse(parts[i], cal);
    const ThresholdChoice choice = sweep_threshold(fused, labels);
    if (!have_best || choice.f1 > best.val_f1) {
      best = cal;
      best.threshold = choice.threshold;
      best.val_f1 = choice.f1;
      have_best = true;
    }
  }
  return best;
}

void save_calibration(const CalibrationArtifact& cal,
                      const std::filesystem::path& path) {
  write_json(path, Json{{"version", kCalibrationVersion},
                        {"mu_c", cal.mu_c},
                        {"sigma_c", cal.sigma_c},
                        {"mu_r", cal.mu_r},
                        {"sigma_r", cal.sigma_r},
                        {"beta", cal.beta},
                        {"threshold", cal.threshold},
                        {"val_f1", cal.val_f1}});
}

CalibrationArtifact load_calibration(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  if (!doc.is_object() || !doc.contains("version"))
    throw FormatError(path.string() + ": not a calibration artifact");
  if (!doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kCalibrationVersion)
    throw VersionError(path.string() + ": unsupported calibration version " +
                       doc["version"].dump());
  try {
    CalibrationArtifact cal;
    cal.mu_c = doc.at("mu_c").get<double>();
    cal.sigma_c = doc.at("sigma_c").get<double>();
    cal.mu_r = doc.at("mu_r").get<double>();
    cal.sigma_r = doc.at("sigma_r").get<double>();
    cal.beta = doc.at("beta").get<double>();
    cal.threshold = doc.at("threshold").get<double>();
    cal.val_f1 = doc.at("val_f1").get<double>();
    if (!(cal.sigma_c > 0.0) || !(cal.sigma_r > 0.0) || !std::isfinite(cal.threshold))
      throw FormatError(path.string() + ": sigmas must be positive, threshold finite");
    return cal;
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace seqguard
