// SPDX-License-Identifier: Apache-2.0
//
// Inference-time scoring. Two signals come out of the model: the distance
// between the task and trajectory latents (does the plan fit the task?)
// and the teacher-forced reconstruction error (is the plan coherent?).
// They are z-normalized on validation-good statistics and fused as
//   score = z_c + beta · z_r,
// and a trajectory is an anomaly iff score > threshold.
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "seqguard/dataset.hpp"
#include "seqguard/model.hpp"

namespace seqguard {

struct ScoreParts {
  double d_contrastive = 0.0;  // ‖v_t − v_s‖₂
  double e_recon = 0.0;        // mean squared reconstruction error
};

inline constexpr int kCalibrationVersion = 1;
inline constexpr double kSigmaFloor = 1e-9;

struct CalibrationArtifact {
  double mu_c = 0.0;
  double sigma_c = 1.0;
  double mu_r = 0.0;
  double sigma_r = 1.0;
  double beta = 0.0;
  double threshold = 0.0;
  double val_f1 = 0.0;
};

/// Throws DimensionError or PreconditionError (empty trajectory).
ScoreParts score_parts(const GuardModel& m, const Vector& task_vec,
                       const Eigen::Ref<const Matrix>& step_vecs);

std::vector<ScoreParts> score_all(const GuardModel& m,
                                  const std::vector<Example>& examples);

double fuse(const ScoreParts& parts, const CalibrationArtifact& cal);

/// Strict inequality: a score equal to the threshold is good.
inline Label classify(double score, double threshold) {
  return score > threshold ? Label::anomaly : Label::good;
}

struct ThresholdChoice {
  double threshold = 0.0;
  double f1 = 0.0;
};

/// Candidate thresholds are one below the minimum score (everything
/// flagged) and the midpoints of consecutive sorted scores, in ascending
/// order. Returns the first candidate with the highest anomaly F1.
/// Throws PreconditionError unless both labels are present.
ThresholdChoice sweep_threshold(std::span<const double> scores,
                                std::span<const Label> labels);

inline const std::vector<double>& default_beta_grid() {
  static const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  return grid;
}

/// Mean and population standard deviation (floored at kSigmaFloor) of
/// the good-labeled parts, written into `cal`.
void fit_normalization(std::span<const ScoreParts> parts,
                       std::span<const Label> labels, CalibrationArtifact& cal);

/// Chooses (beta, threshold) maximizing anomaly F1; ties go to the smaller
/// beta, then the smaller threshold.
CalibrationArtifact calibrate(std::span<const ScoreParts> parts,
                              std::span<const Label> labels,
                              std::span<const double> beta_grid = default_beta_grid());

void save_calibration(const CalibrationArtifact& cal,
                      const std::filesystem::path& path);
CalibrationArtifact load_calibration(const std::filesystem::path& path);

}  // namespace seqguard
