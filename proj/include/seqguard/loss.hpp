// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "seqguard/numcore.hpp"

namespace seqguard {

struct LossBreakdown {
  double l_contrastive = 0.0;
  double l_reconstruction = 0.0;
  double l_total = 0.0;
  double alpha = 0.0;

  /// Fills l_total = lc + alpha · lr.
  static LossBreakdown make(double lc, double lr, double alpha);
};

/// lc + alpha · lr. Throws PreconditionError on a negative component.
double hybrid(double lc, double lr, double alpha);

/// Triplet margin loss with in-batch negatives. Row i of `v_t` is the
/// anchor, row i of `v_s` its positive, every other row of `v_s` a
/// negative. Returns the mean over all N(N−1) anchor/negative pairs of
/// max(0, ‖v_t[i]−v_s[i]‖ − ‖v_t[i]−v_s[j]‖ + margin).
/// When the gradient outputs are non-null they receive dL/dv_t and dL/dv_s.
/// Throws PreconditionError for N < 2.
double triplet_inbatch(const Matrix& v_t, const Matrix& v_s, double margin,
                       Matrix* d_vt = nullptr, Matrix* d_vs = nullptr);

/// Masked reconstruction MSE. Sample i contributes the mean squared error
/// over its first `lengths[i]` rows and all columns; the result is the
/// average over samples with at least one real row. Rows past the length
/// are padding and never read. `d_recon`, when given, receives the
/// gradient with the same (padded) shapes as `recon`.
double recon_mse(std::span<const Matrix> recon, std::span<const Matrix> target,
                 std::span<const Eigen::Index> lengths,
                 std::vector<Matrix>* d_recon = nullptr);

}  // namespace seqguard
