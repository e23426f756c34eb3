// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "seqguard/dataset.hpp"
#include "seqguard/model.hpp"
#include "seqguard/rng.hpp"
#include "seqguard/score.hpp"

namespace seqguard::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

/// Random labeled examples with 1..max_len steps.
inline std::vector<Example> random_examples(std::size_t n, int d, int max_len, Rng& rng,
                                            Label label = Label::good) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = static_cast<Eigen::Index>(rng.between(1, max_len));
    out.push_back({"ex-" + std::to_string(i), random_vector(d, rng),
                   random_matrix(len, d, rng), label, "toy"});
  }
  return out;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("seqguard-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Triplet loss as a plain double loop over anchors and negatives.
inline double oracle_triplet(const Matrix& t, const Matrix& s, double margin) {
  const Eigen::Index n = t.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double dp = 0.0;
    for (Eigen::Index k = 0; k < t.cols(); ++k) dp += (t(i, k) - s(i, k)) * (t(i, k) - s(i, k));
    dp = std::sqrt(dp);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dn = 0.0;
      for (Eigen::Index k = 0; k < t.cols(); ++k)
        dn += (t(i, k) - s(j, k)) * (t(i, k) - s(j, k));
      sum += std::max(0.0, dp - std::sqrt(dn) + margin);
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

/// Anomaly F1 from raw counts, through precision and recall.
inline double oracle_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

/// Exhaustive threshold sweep: every candidate is evaluated by a full pass
/// over the scores. Candidates are min - 1 and every sorted midpoint.
inline ThresholdChoice oracle_sweep(const std::vector<double>& scores,
                                    const std::vector<Label>& labels) {
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> candidates = {sorted.front() - 1.0};
  for (std::size_t i = 1; i < sorted.size(); ++i)
    candidates.push_back((sorted[i - 1] + sorted[i]) / 2.0);
  ThresholdChoice best{0.0, -1.0};
  for (double t : candidates) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool flagged = scores[i] > t;
      const bool anomaly = labels[i] == Label::anomaly;
      tp += flagged && anomaly;
      fp += flagged && !anomaly;
      fn += !flagged && anomaly;
    }
    const double f1 = oracle_f1(tp, fp, fn);
    if (f1 > best.f1) best = {t, f1};
  }
  return best;
}

/// Independent calibration: good-only z statistics, then an exhaustive
/// sweep per beta in ascending order.
inline CalibrationArtifact oracle_calibrate(const std::vector<ScoreParts>& parts,
                                            const std::vector<Label>& labels,
                                            std::vector<double> betas) {
  CalibrationArtifact cal;
  double sc = 0.0, sr = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (labels[i] == Label::good) {
      sc += parts[i].d_contrastive;
      sr += parts[i].e_recon;
      ++n;
    }
  cal.mu_c = sc / static_cast<double>(n);
  cal.mu_r = sr / static_cast<double>(n);
  double vc = 0.0, vr = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (labels[i] == Label::good) {
      vc += (parts[i].d_contrastive - cal.mu_c) * (parts[i].d_contrastive - cal.mu_c);
      vr += (parts[i].e_recon - cal.mu_r) * (parts[i].e_recon - cal.mu_r);
    }
  cal.sigma_c = std::max(std::sqrt(vc / static_cast<double>(n)), 1e-9);
  cal.sigma_r = std::max(std::sqrt(vr / static_cast<double>(n)), 1e-9);
  std::sort(betas.begin(), betas.end());
  CalibrationArtifact best = cal;
  best.val_f1 = -1.0;
  for (double beta : betas) {
    std::vector<double> fused;
    for (const auto& p : parts)
      fused.push_back((p.d_contrastive - cal.mu_c) / cal.sigma_c +
                      beta * ((p.e_recon - cal.mu_r) / cal.sigma_r));
    const ThresholdChoice c = oracle_sweep(fused, labels);
    if (c.f1 > best.val_f1) {
      best.beta = beta;
      best.threshold = c.threshold;
      best.val_f1 = c.f1;
    }
  }
  return best;
}

}  // namespace seqguard::testing
