// SPDX-License-Identifier: Apache-2.0
#include "seqguard/numcore.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "seqguard/error.hpp"

namespace seqguard {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw NumericError("non-finite values in " + what);
}

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw NumericError("non-finite values in " + what);
}

Vector linear_forward(const Vector& x, const Matrix& W, const Vector& b) {
  if (W.cols() != x.size() || W.rows() != b.size()) {
    throw DimensionError("linear_forward: W is " + shape_of(W) + ", x is " +
                         std::to_string(x.size()) + ", b is " +
                         std::to_string(b.size()));
  }
  return W * x + b;
}

void xavier_uniform(Eigen::Ref<Matrix> m, Eigen::Index fan_in,
                    Eigen::Index fan_out, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rng.uniform(-bound, bound);
}

GruCellParams GruCellParams::zeros(Eigen::Index input_dim,
                                   Eigen::Index hidden_dim) {
  return {Matrix::Zero(3 * hidden_dim, input_dim),
          Matrix::Zero(3 * hidden_dim, hidden_dim),
          Vector::Zero(3 * hidden_dim)};
}

GruCellParams GruCellParams::xavier(Eigen::Index input_dim,
                                    Eigen::Index hidden_dim, Rng& rng) {
  GruCellParams p = zeros(input_dim, hidden_dim);
  xavier_uniform(p.W_z(), input_dim, hidden_dim, rng);
  xavier_uniform(p.W_r(), input_dim, hidden_dim, rng);
  xavier_uniform(p.W_h(), input_dim, hidden_dim, rng);
  xavier_uniform(p.U_z(), hidden_dim, hidden_dim, rng);
  xavier_uniform(p.U_r(), hidden_dim, hidden_dim, rng);
  xavier_uniform(p.U_h(), hidden_dim, hidden_dim, rng);
  return p;
}

void GruCellParams::validate(const std::string& name) const {
  const Eigen::Index h = U.cols();
  if (U.rows() != 3 * h || W.rows() != 3 * h || b.size() != 3 * h) {
    throw DimensionError(name + ": inconsistent GRU blocks W " + shape_of(W) +
                         ", U " + shape_of(U) + ", b " +
                         std::to_string(b.size()));
  }
}

namespace {

void check_step_shapes(Eigen::Index x_dim, Eigen::Index h_dim,
                       const GruCellParams& p) {
  if (x_dim != p.input_dim() || h_dim != p.hidden_dim()) {
    throw DimensionError("gru: input " + std::to_string(x_dim) + ", hidden " +
                         std::to_string(h_dim) + " vs cell " +
                         std::to_string(p.input_dim()) + "->" +
                         std::to_string(p.hidden_dim()));
  }
}

// Applies one step given the precomputed input projection W x + b.
template <class Proj, class Prev, class Out>
void gru_cell(const Proj& proj, const Prev& h, const GruCellParams& p,
              Out&& z, Out&& r, Out&& c, Out&& h_next) {
  const Eigen::Index H = p.hidden_dim();
  RowVector zr = proj.head(2 * H) + h * p.U.topRows(2 * H).transpose();
  z = zr.head(H).unaryExpr([](double a) { return sigmoid(a); });
  r = zr.tail(H).unaryExpr([](double a) { return sigmoid(a); });
  RowVector rh = r.cwiseProduct(h);
  c = (proj.tail(H) + rh * p.U.bottomRows(H).transpose()).array().tanh();
  h_next = h + z.cwiseProduct(c - h);
}

}  // namespace

Vector gru_step(const Vector& x, const Vector& h, const GruCellParams& p) {
  check_step_shapes(x.size(), h.size(), p);
  const Eigen::Index H = p.hidden_dim();
  RowVector proj = (p.W * x + p.b).transpose();
  RowVector z(H), r(H), c(H), out(H);
  gru_cell(proj, h.transpose(), p, z, r, c, out);
  Vector result = out.transpose();
  require_finite(result, "gru_step output");
  return result;
}

GruTrace gru_forward(const Eigen::Ref<const Matrix>& inputs, const Vector& h0,
                     const GruCellParams& p) {
  check_step_shapes(inputs.cols(), h0.size(), p);
  const Eigen::Index n = inputs.rows();
  const Eigen::Index H = p.hidden_dim();
  Matrix proj = inputs * p.W.transpose();
  proj.rowwise() += p.b.transpose();

  GruTrace t{Matrix(n, H), Matrix(n, H), Matrix(n, H), Matrix(n + 1, H)};
  t.hidden.row(0) = h0.transpose();
  for (Eigen::Index s = 0; s < n; ++s) {
    RowVector z(H), r(H), c(H), out(H);
    gru_cell(proj.row(s), t.hidden.row(s), p, z, r, c, out);
    t.z.row(s) = z;
    t.r.row(s) = r;
    t.c.row(s) = c;
    t.hidden.row(s + 1) = out;
  }
  return t;
}

Vector gru_run(const Eigen::Ref<const Matrix>& inputs, const Vector& h0,
               const GruCellParams& p) {
  check_step_shapes(inputs.cols(), h0.size(), p);
  const Eigen::Index H = p.hidden_dim();
  Matrix proj = inputs * p.W.transpose();
  proj.rowwise() += p.b.transpose();
  RowVector h = h0.transpose();
  RowVector z(H), r(H), c(H), out(H);
  for (Eigen::Index s = 0; s < inputs.rows(); ++s) {
    gru_cell(proj.row(s), h, p, z, r, c, out);
    h = out;
  }
  return h.transpose();
}

Vector gru_backward(const GruTrace& trace,
                    const Eigen::Ref<const Matrix>& inputs,
                    const Eigen::Ref<const Matrix>& d_outputs,
                    const GruCellParams& p, GruCellParams& grad) {
  const Eigen::Index n = trace.steps();
  const Eigen::Index H = p.hidden_dim();
  if (d_outputs.rows() != n || d_outputs.cols() != H || inputs.rows() != n) {
    throw DimensionError("gru_backward: trace has " + std::to_string(n) +
                         " steps, got " + std::to_string(d_outputs.rows()) +
                         " output grads and " + std::to_string(inputs.rows()) +
                         " inputs");
  }

  // Pre-activation gradients [da_z, da_r, da_c] per step, plus r ⊙ h_prev
  // for the candidate's recurrent weight gradient.
  Matrix d_pre(n, 3 * H);
  Matrix reset_hidden(n, H);
  RowVector dh = RowVector::Zero(H);
  const auto U_zr = p.U.topRows(2 * H);
  const auto U_h = p.U.bottomRows(H);

  for (Eigen::Index s = n - 1; s >= 0; --s) {
    dh += d_outputs.row(s);
    const auto h_prev = trace.hidden.row(s);
    const auto z = trace.z.row(s);
    const auto r = trace.r.row(s);
    const auto c = trace.c.row(s);

    RowVector dz = dh.cwiseProduct(c - h_prev);
    RowVector dc = dh.cwiseProduct(z);
    RowVector dh_prev = dh.cwiseProduct(RowVector::Ones(H) - z);

    RowVector da_c =
        dc.array() * (1.0 - c.array().square());
    RowVector d_rh = da_c * U_h;
    RowVector dr = d_rh.cwiseProduct(h_prev);
    dh_prev += d_rh.cwiseProduct(r);

    RowVector da_r = dr.array() * r.array() * (1.0 - r.array());
    RowVector da_z = dz.array() * z.array() * (1.0 - z.array());

    d_pre.row(s).head(H) = da_z;
    d_pre.row(s).segment(H, H) = da_r;
    d_pre.row(s).tail(H) = da_c;
    reset_hidden.row(s) = r.cwiseProduct(h_prev);

    dh_prev += d_pre.row(s).head(2 * H) * U_zr;
    dh = dh_prev;
  }

  grad.W.noalias() += d_pre.transpose() * inputs;
  grad.U.topRows(2 * H).noalias() +=
      d_pre.leftCols(2 * H).transpose() * trace.hidden.topRows(n);
  grad.U.bottomRows(H).noalias() += d_pre.rightCols(H).transpose() * reset_hidden;
  grad.b += d_pre.colwise().sum().transpose();
  return dh.transpose();
}

void adam_update(Eigen::Ref<Vector> param, const Eigen::Ref<const Vector>& grad,
                 AdamState& state, const AdamConfig& cfg) {
  if (grad.size() != param.size() || state.m.size() != param.size() ||
      state.v.size() != param.size()) {
    throw DimensionError("adam_update: param " + std::to_string(param.size()) +
                         ", grad " + std::to_string(grad.size()) + ", state " +
                         std::to_string(state.m.size()));
  }
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  param.array() -= cfg.lr * (state.m.array() / bc1) /
                   ((state.v.array() / bc2).sqrt() + cfg.eps);
}

double clip_global_norm(Eigen::Ref<Vector> grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
  return norm;
}

GradCheckResult grad_check(const LossWithGrad& loss, const Vector& theta,
                           double delta, std::size_t max_coords,
                           std::uint64_t seed, double floor) {
  Vector analytic = Vector::Zero(theta.size());
  const double f0 = loss(theta, &analytic);
  if (!std::isfinite(f0)) throw NumericError("grad_check: non-finite loss");

  std::vector<Eigen::Index> coords(static_cast<std::size_t>(theta.size()));
  std::iota(coords.begin(), coords.end(), Eigen::Index{0});
  if (max_coords != 0 && max_coords < coords.size()) {
    Rng rng(seed);
    rng.shuffle(coords);
    coords.resize(max_coords);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult result;
  Vector probe = theta;
  for (Eigen::Index i : coords) {
    probe[i] = theta[i] + delta;
    const double up = loss(probe, nullptr);
    probe[i] = theta[i] - delta;
    const double down = loss(probe, nullptr);
    probe[i] = theta[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("grad_check: non-finite loss at coordinate " +
                         std::to_string(i));
    const double numeric = (up - down) / (2.0 * delta);
    const double a = analytic[i];
    const double scale = std::max({std::abs(a), std::abs(numeric), floor});
    const double rel = std::abs(a - numeric) / scale;
    if (rel > result.max_rel_error || result.worst_index < 0) {
      result.max_rel_error = std::max(result.max_rel_error, rel);
      result.worst_index = i;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace seqguard
