// SPDX-License-Identifier: Apache-2.0
#include "seqguard/loss.hpp"

#include "seqguard/error.hpp"

namespace seqguard {

LossBreakdown LossBreakdown::make(double lc, double lr, double alpha) {
  return {lc, lr, lc + alpha * lr, alpha};
}

double hybrid(double lc, double lr, double alpha) {
  if (lc < 0.0 || lr < 0.0)
    throw PreconditionError("hybrid: loss components must be non-negative");
  return lc + alpha * lr;
}

double triplet_inbatch(const Matrix& v_t, const Matrix& v_s, double margin,
                       Matrix* d_vt, Matrix* d_vs) {
  const Eigen::Index n = v_t.rows();
  if (n < 2)
    throw PreconditionError("triplet_inbatch: need at least 2 pairs, got " +
                            std::to_string(n));
  if (v_s.rows() != n || v_s.cols() != v_t.cols())
    throw DimensionError("triplet_inbatch: v_t " + shape_of(v_t) + " vs v_s " +
                         shape_of(v_s));
  const bool want_grad = d_vt != nullptr && d_vs != nullptr;
  if (want_grad) {
    *d_vt = Matrix::Zero(n, v_t.cols());
    *d_vs = Matrix::Zero(n, v_s.cols());
  }
  const double scale = 1.0 / static_cast<double>(n * (n - 1));

  // Unit direction from b to a; zero when the points coincide.
  auto direction = [](const RowVector& diff, double dist) -> RowVector {
    return dist > 0.0 ? RowVector(diff / dist) : RowVector::Zero(diff.size());
  };

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowVector pos_diff = v_t.row(i) - v_s.row(i);
    const double d_pos = pos_diff.norm();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const RowVector neg_diff = v_t.row(i) - v_s.row(j);
      const double d_neg = neg_diff.norm();
      const double term = d_pos - d_neg + margin;
      if (term <= 0.0) continue;
      total += term;
      if (want_grad) {
        const RowVector u_pos = direction(pos_diff, d_pos);
        const RowVector u_neg = direction(neg_diff, d_neg);
        d_vt->row(i) += scale * (u_pos - u_neg);
        d_vs->row(i) -= scale * u_pos;
        d_vs->row(j) += scale * u_neg;
      }
    }
  }
  return total * scale;
}

double recon_mse(std::span<const Matrix> recon, std::span<const Matrix> target,
                 std::span<const Eigen::Index> lengths,
                 std::vector<Matrix>* d_recon) {
  if (recon.size() != target.size() || recon.size() != lengths.size())
    throw DimensionError("recon_mse: batch sizes differ (" +
                         std::to_string(recon.size()) + ", " +
                         std::to_string(target.size()) + ", " +
                         std::to_string(lengths.size()) + ")");
  std::size_t real_samples = 0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (recon[i].rows() != target[i].rows() || recon[i].cols() != target[i].cols())
      throw DimensionError("recon_mse: sample " + std::to_string(i) + " recon " +
                           shape_of(recon[i]) + " vs target " +
                           shape_of(target[i]));
    if (lengths[i] < 0 || lengths[i] > recon[i].rows())
      throw DimensionError("recon_mse: sample " + std::to_string(i) +
                           " length " + std::to_string(lengths[i]) +
                           " exceeds padded rows " +
                           std::to_string(recon[i].rows()));
    if (lengths[i] > 0 && recon[i].cols() > 0) ++real_samples;
  }
  if (real_samples == 0)
    throw PreconditionError("recon_mse: no real step positions in batch");

  if (d_recon != nullptr) {
    d_recon->clear();
    for (const auto& r : recon) d_recon->push_back(Matrix::Zero(r.rows(), r.cols()));
  }
  const double batch_scale = 1.0 / static_cast<double>(real_samples);
  double total = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const Eigen::Index len = lengths[i];
    if (len == 0 || recon[i].cols() == 0) continue;
    const auto diff = (recon[i].topRows(len) - target[i].topRows(len)).eval();
    const double count = static_cast<double>(len * recon[i].cols());
    total += diff.squaredNorm() / count;
    if (d_recon != nullptr)
      (*d_recon)[i].topRows(len) = (2.0 * batch_scale / count) * diff;
  }
  return total * batch_scale;
}

}  // namespace seqguard
