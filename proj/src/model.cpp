// SPDX-License-Identifier: Apache-2.0
#include "seqguard/model.hpp"

#include <iostream>
#include <set>

#include "seqguard/error.hpp"
#include "seqguard/io.hpp"

namespace seqguard {

GuardModel GuardModel::zeros(const ModelDims& dims) {
  if (dims.d <= 0 || dims.h_mid <= 0 || dims.l <= 0)
    throw DimensionError("model dims must be positive");
  GuardModel m;
  m.dims = dims;
  m.task_w1 = Matrix::Zero(dims.h_mid, dims.d);
  m.task_b1 = Vector::Zero(dims.h_mid);
  m.task_w2 = Matrix::Zero(dims.l, dims.h_mid);
  m.task_b2 = Vector::Zero(dims.l);
  m.enc = GruCellParams::zeros(dims.d, dims.l);
  m.dec = GruCellParams::zeros(dims.d, dims.l);
  m.out_w = Matrix::Zero(dims.d, dims.l);
  m.out_b = Vector::Zero(dims.d);
  return m;
}

GuardModel GuardModel::initialized(const ModelDims& dims, std::uint64_t seed) {
  GuardModel m = zeros(dims);
  m.seed = seed;
  Rng rng = Rng(seed).split("init");
  xavier_uniform(m.task_w1, dims.d, dims.h_mid, rng);
  xavier_uniform(m.task_w2, dims.h_mid, dims.l, rng);
  m.enc = GruCellParams::xavier(dims.d, dims.l, rng);
  m.dec = GruCellParams::xavier(dims.d, dims.l, rng);
  xavier_uniform(m.out_w, dims.l, dims.d, rng);
  return m;
}

void GuardModel::validate() const {
  const GuardModel ref = zeros(dims);
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  };
  const bool ok = same(task_w1, ref.task_w1) && same(task_b1, ref.task_b1) &&
                  same(task_w2, ref.task_w2) && same(task_b2, ref.task_b2) &&
                  same(enc.W, ref.enc.W) && same(enc.U, ref.enc.U) &&
                  same(enc.b, ref.enc.b) && same(dec.W, ref.dec.W) &&
                  same(dec.U, ref.dec.U) && same(dec.b, ref.dec.b) &&
                  same(out_w, ref.out_w) && same(out_b, ref.out_b);
  if (!ok)
    throw DimensionError("model tensors inconsistent with dims d=" +
                         std::to_string(dims.d) + " h_mid=" +
                         std::to_string(dims.h_mid) +
                         " l=" + std::to_string(dims.l));
}

Eigen::Index GuardModel::parameter_count() const {
  Eigen::Index n = 0;
  visit([&](const TensorView& t) { n += t.size(); });
  return n;
}

Vector GuardModel::flatten() const {
  Vector flat(parameter_count());
  Eigen::Index offset = 0;
  visit([&](const TensorView& t) {
    flat.segment(offset, t.size()) = Eigen::Map<const Vector>(t.data, t.size());
    offset += t.size();
  });
  return flat;
}

void GuardModel::assign(const Vector& flat) {
  if (flat.size() != parameter_count())
    throw DimensionError("assign: expected " +
                         std::to_string(parameter_count()) +
                         " parameters, got " + std::to_string(flat.size()));
  Eigen::Index offset = 0;
  visit([&](const TensorView& t) {
    Eigen::Map<Vector>(t.data, t.size()) = flat.segment(offset, t.size());
    offset += t.size();
  });
}

void GuardModel::round_to_f32() {
  visit([](const TensorView& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i)
      t.data[i] = static_cast<double>(static_cast<float>(t.data[i]));
  });
}

const std::vector<std::string>& tensor_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    GuardModel::zeros(ModelDims{1, 1, 1}).visit(
        [&](const TensorView& t) { out.emplace_back(t.name); });
    return out;
  }();
  return names;
}

Vector encode_task(const Vector& task_vec, const GuardModel& m) {
  if (task_vec.size() != m.dims.d)
    throw DimensionError("encode_task: task vector has " +
                         std::to_string(task_vec.size()) + ", model expects " +
                         std::to_string(m.dims.d));
  Vector hidden = linear_forward(task_vec, m.task_w1, m.task_b1).array().tanh();
  return linear_forward(hidden, m.task_w2, m.task_b2);
}

namespace {

void check_steps(const Eigen::Ref<const Matrix>& steps, const GuardModel& m,
                 const char* where) {
  if (steps.rows() == 0)
    throw PreconditionError(std::string(where) + ": empty step sequence");
  if (steps.rows() > kMaxSteps)
    throw PreconditionError(std::string(where) + ": " +
                            std::to_string(steps.rows()) + " steps exceed " +
                            std::to_string(kMaxSteps));
  if (steps.cols() != m.dims.d)
    throw DimensionError(std::string(where) + ": steps have width " +
                         std::to_string(steps.cols()) + ", model expects " +
                         std::to_string(m.dims.d));
}

}  // namespace

Vector encode_trajectory(const Eigen::Ref<const Matrix>& steps,
                         const GuardModel& m) {
  check_steps(steps, m, "encode_trajectory");
  return gru_run(steps, Vector::Zero(m.dims.l), m.enc);
}

Matrix decoder_inputs(const Eigen::Ref<const Matrix>& steps) {
  Matrix in = Matrix::Zero(steps.rows(), steps.cols());
  if (steps.rows() > 1)
    in.bottomRows(steps.rows() - 1) = steps.topRows(steps.rows() - 1);
  return in;
}

Matrix decode_trajectory(const Vector& v_s,
                         const Eigen::Ref<const Matrix>& teacher_steps,
                         const GuardModel& m) {
  check_steps(teacher_steps, m, "decode_trajectory");
  if (v_s.size() != m.dims.l)
    throw DimensionError("decode_trajectory: latent has " +
                         std::to_string(v_s.size()) + ", model expects " +
                         std::to_string(m.dims.l));
  const GruTrace trace = gru_forward(decoder_inputs(teacher_steps), v_s, m.dec);
  Matrix recon = trace.outputs() * m.out_w.transpose();
  recon.rowwise() += m.out_b.transpose();
  return recon;
}

Matrix clamp_steps(const Matrix& steps, std::string_view id) {
  if (steps.rows() > kMaxSteps) {
    std::cerr << "warning: trajectory '" << id << "' has " << steps.rows()
              << " steps; truncated to " << kMaxSteps << "\n";
    return steps.topRows(kMaxSteps);
  }
  return steps.topRows(steps.rows());
}

SampleTrace forward_sample(const GuardModel& m, const Vector& task,
                           const Eigen::Ref<const Matrix>& steps,
                           bool with_decoder) {
  check_steps(steps, m, "forward_sample");
  if (task.size() != m.dims.d)
    throw DimensionError("forward_sample: task vector has " +
                         std::to_string(task.size()));
  SampleTrace t;
  t.task_in = task;
  t.task_hidden = (m.task_w1 * task + m.task_b1).array().tanh();
  t.v_t = m.task_w2 * t.task_hidden + m.task_b2;
  t.enc = gru_forward(steps, Vector::Zero(m.dims.l), m.enc);
  t.v_s = t.enc.final_hidden().transpose();
  if (with_decoder) {
    t.dec_in = decoder_inputs(steps);
    t.dec = gru_forward(t.dec_in, t.v_s, m.dec);
    t.recon = t.dec.outputs() * m.out_w.transpose();
    t.recon.rowwise() += m.out_b.transpose();
  }
  return t;
}

void backward_sample(const GuardModel& m, const SampleTrace& trace,
                     const Eigen::Ref<const Matrix>& steps, const Vector& d_vt,
                     const Vector& d_vs, const Matrix* d_recon,
                     GuardModel& grad) {
  // Task tower.
  grad.task_w2.noalias() += d_vt * trace.task_hidden.transpose();
  grad.task_b2 += d_vt;
  Vector d_pre = (m.task_w2.transpose() * d_vt).array() *
                 (1.0 - trace.task_hidden.array().square());
  grad.task_w1.noalias() += d_pre * trace.task_in.transpose();
  grad.task_b1 += d_pre;

  Vector d_latent = d_vs;
  if (d_recon != nullptr && trace.recon.size() != 0) {
    grad.out_w.noalias() += d_recon->transpose() * trace.dec.outputs();
    grad.out_b += d_recon->colwise().sum().transpose();
    Matrix d_dec_out = *d_recon * m.out_w;
    d_latent += gru_backward(trace.dec, trace.dec_in, d_dec_out, m.dec, grad.dec);
  }
  Matrix d_enc_out = Matrix::Zero(steps.rows(), m.dims.l);
  d_enc_out.row(steps.rows() - 1) = d_latent.transpose();
  gru_backward(trace.enc, steps, d_enc_out, m.enc, grad.enc);
}

}  // namespace seqguard
