// SPDX-License-Identifier: Apache-2.0
//
// Dense numeric kernel: affine layers, the gated recurrent unit with its
// hand-written backward pass, Adam, global-norm clipping and finite
// difference gradient verification. Storage is Eigen, row-major, 64-bit.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "seqguard/rng.hpp"

namespace seqguard {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// "RxC" for error messages.
std::string shape_of(const Matrix& m);

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

/// W·x + b. Throws DimensionError naming both shapes on mismatch.
Vector linear_forward(const Vector& x, const Matrix& W, const Vector& b);

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

/// Uniform in ±sqrt(6 / (fan_in + fan_out)).
void xavier_uniform(Eigen::Ref<Matrix> m, Eigen::Index fan_in,
                    Eigen::Index fan_out, Rng& rng);

/// GRU cell parameters. The three gates are stacked row-wise in the order
/// update (z), reset (r), candidate (h):
///   W = [W_z; W_r; W_h]  (3H x D)
///   U = [U_z; U_r; U_h]  (3H x H)
///   b = [b_z; b_r; b_h]  (3H)
struct GruCellParams {
  Matrix W;
  Matrix U;
  Vector b;

  static GruCellParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim);
  /// Per-gate Xavier init, zero biases.
  static GruCellParams xavier(Eigen::Index input_dim, Eigen::Index hidden_dim,
                              Rng& rng);

  Eigen::Index input_dim() const { return W.cols(); }
  Eigen::Index hidden_dim() const { return U.cols(); }

  auto W_z() { return W.topRows(hidden_dim()); }
  auto W_r() { return W.middleRows(hidden_dim(), hidden_dim()); }
  auto W_h() { return W.bottomRows(hidden_dim()); }
  auto U_z() { return U.topRows(hidden_dim()); }
  auto U_r() { return U.middleRows(hidden_dim(), hidden_dim()); }
  auto U_h() { return U.bottomRows(hidden_dim()); }
  auto b_z() { return b.head(hidden_dim()); }
  auto b_r() { return b.segment(hidden_dim(), hidden_dim()); }
  auto b_h() { return b.tail(hidden_dim()); }

  /// Throws DimensionError if the blocks disagree with each other.
  void validate(const std::string& name) const;
};

/// One GRU step:
///   z = σ(W_z x + U_z h + b_z)
///   r = σ(W_r x + U_r h + b_r)
///   c = tanh(W_h x + U_h (r ⊙ h) + b_h)
///   h' = (1 − z) ⊙ h + z ⊙ c
Vector gru_step(const Vector& x, const Vector& h, const GruCellParams& p);

/// Activations retained by `gru_forward` for the backward pass. Row t of
/// Z, R, C belongs to step t; `hidden` has n+1 rows with row 0 = h0.
struct GruTrace {
  Matrix z;
  Matrix r;
  Matrix c;
  Matrix hidden;

  Eigen::Index steps() const { return z.rows(); }
  auto final_hidden() const { return hidden.row(hidden.rows() - 1); }
  /// Hidden outputs h_1..h_n as an n x H block.
  auto outputs() const { return hidden.bottomRows(hidden.rows() - 1); }
};

/// Runs the cell over `inputs` (one step per row) from `h0`. The input
/// projections are computed for all steps at once.
GruTrace gru_forward(const Eigen::Ref<const Matrix>& inputs, const Vector& h0,
                     const GruCellParams& p);

/// Final hidden state only; no trace is kept.
Vector gru_run(const Eigen::Ref<const Matrix>& inputs, const Vector& h0,
               const GruCellParams& p);

/// Backpropagates through a forward trace. `d_outputs` holds dL/dh_t for
/// t = 1..n (n x H). Parameter gradients are accumulated into `grad`
/// (same shapes as `p`); the gradient with respect to h0 is returned.
Vector gru_backward(const GruTrace& trace,
                    const Eigen::Ref<const Matrix>& inputs,
                    const Eigen::Ref<const Matrix>& d_outputs,
                    const GruCellParams& p, GruCellParams& grad);

struct AdamConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  std::int64_t t = 0;

  static AdamState zeros(Eigen::Index n) {
    return {Vector::Zero(n), Vector::Zero(n), 0};
  }
};

/// In-place Adam step with bias-corrected moments; t is incremented first.
void adam_update(Eigen::Ref<Vector> param, const Eigen::Ref<const Vector>& grad,
                 AdamState& state, const AdamConfig& cfg);

/// Scales `grad` so that its L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
double clip_global_norm(Eigen::Ref<Vector> grad, double max_norm);

/// Loss over a flat parameter vector. When `grad` is non-null the callee
/// writes the analytic gradient into it.
using LossWithGrad = std::function<double(const Vector& theta, Vector* grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares analytic gradients with central differences
/// (f(θ+δ) − f(θ−δ)) / 2δ. Relative error per coordinate is
/// |a − n| / max(|a|, |n|, floor); coordinates where both sides are below
/// `floor` are compared on an absolute scale. When `max_coords` is nonzero
/// and smaller than the parameter count a random subsample is checked.
GradCheckResult grad_check(const LossWithGrad& loss, const Vector& theta,
                           double delta = 1e-5, std::size_t max_coords = 0,
                           std::uint64_t seed = 0, double floor = 1e-7);

}  // namespace seqguard
