// SPDX-License-Identifier: Apache-2.0
//
// Two-tower Siamese recurrent autoencoder.
//
//   task tower:        v_t = W2 · tanh(W1 · task + b1) + b2
//   trajectory tower:  v_s = final hidden state of the GRU encoder (h0 = 0)
//   decoder:           GRU started from v_s, fed the previous ground-truth
//                      step (zero at the first position); each hidden state
//                      is projected back to the embedding space.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "seqguard/numcore.hpp"

namespace seqguard {

inline constexpr Eigen::Index kMaxSteps = 64;

struct ModelDims {
  int d = 384;
  int h_mid = 256;
  int l = 128;

  bool operator==(const ModelDims&) const = default;
};

/// Named, contiguous parameter block handed out by `GuardModel::visit`.
struct TensorView {
  std::string_view name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const { return rows * cols; }
};

struct GuardModel {
  ModelDims dims;
  std::uint64_t seed = 0;

  Matrix task_w1;  // h_mid x d
  Vector task_b1;
  Matrix task_w2;  // l x h_mid
  Vector task_b2;
  GruCellParams enc;  // d -> l
  GruCellParams dec;  // d -> l
  Matrix out_w;       // d x l
  Vector out_b;

  static GuardModel zeros(const ModelDims& dims);
  /// Xavier-uniform weights and zero biases from a generator seeded by `seed`.
  static GuardModel initialized(const ModelDims& dims, std::uint64_t seed);

  /// Throws DimensionError when any block disagrees with `dims`.
  void validate() const;

  /// Visits every parameter tensor in the fixed checkpoint order:
  ///   task.w1 task.b1 task.w2 task.b2
  ///   enc.W_z enc.W_r enc.W_h enc.U_z enc.U_r enc.U_h enc.b_z enc.b_r enc.b_h
  ///   dec.(same nine)
  ///   out.w out.b
  template <class F>
  void visit(F&& f);
  template <class F>
  void visit(F&& f) const {
    const_cast<GuardModel*>(this)->visit(
        [&](const TensorView& t) { f(static_cast<const TensorView&>(t)); });
  }

  Eigen::Index parameter_count() const;
  Vector flatten() const;
  /// Inverse of `flatten`. Throws DimensionError on a length mismatch.
  void assign(const Vector& flat);

  /// Rounds every parameter to 32-bit precision.
  void round_to_f32();
};

/// Names in checkpoint order; shapes follow from ModelDims.
const std::vector<std::string>& tensor_names();

Vector encode_task(const Vector& task_vec, const GuardModel& m);

/// Throws PreconditionError on an empty sequence or more than kMaxSteps
/// steps, DimensionError on a width mismatch.
Vector encode_trajectory(const Eigen::Ref<const Matrix>& steps,
                         const GuardModel& m);

/// Teacher-forced decoder input: zero row, then steps shifted down by one.
Matrix decoder_inputs(const Eigen::Ref<const Matrix>& steps);

/// One reconstruction row per teacher step.
Matrix decode_trajectory(const Vector& v_s,
                         const Eigen::Ref<const Matrix>& teacher_steps,
                         const GuardModel& m);

/// Returns the first kMaxSteps rows, warning on stderr when it truncates.
Matrix clamp_steps(const Matrix& steps, std::string_view id);

/// Activations kept by `forward_sample` for `backward_sample`.
struct SampleTrace {
  Vector task_in;
  Vector task_hidden;  // tanh(W1 · task + b1)
  Vector v_t;
  GruTrace enc;
  Vector v_s;
  Matrix dec_in;
  GruTrace dec;  // empty when the decoder was skipped
  Matrix recon;  // n x d, empty when the decoder was skipped
};

SampleTrace forward_sample(const GuardModel& m, const Vector& task,
                           const Eigen::Ref<const Matrix>& steps,
                           bool with_decoder);

/// Accumulates parameter gradients into `grad` given upstream gradients
/// for v_t, v_s and (when the decoder ran) the reconstruction rows.
void backward_sample(const GuardModel& m, const SampleTrace& trace,
                     const Eigen::Ref<const Matrix>& steps, const Vector& d_vt,
                     const Vector& d_vs, const Matrix* d_recon,
                     GuardModel& grad);

inline constexpr int kCheckpointVersion = 1;

/// JSON checkpoint: {version, dims: {d, h_mid, l}, seed, tensors: {name:
/// [row-major values]}}, values at 32-bit precision.
void save_checkpoint(const GuardModel& m, const std::filesystem::path& path);
/// Throws VersionError, FormatError or DimensionError.
GuardModel load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

template <class F>
void GuardModel::visit(F&& f) {
  auto mat = [&](std::string_view name, auto&& block) {
    f(TensorView{name, block.data(), block.rows(), block.cols()});
  };
  auto vec = [&](std::string_view name, auto&& block) {
    f(TensorView{name, block.data(), block.size(), 1});
  };
  mat("task.w1", task_w1);
  vec("task.b1", task_b1);
  mat("task.w2", task_w2);
  vec("task.b2", task_b2);
  auto gru = [&](GruCellParams& p, std::string_view w_z, std::string_view w_r,
                 std::string_view w_h, std::string_view u_z,
                 std::string_view u_r, std::string_view u_h,
                 std::string_view b_z, std::string_view b_r,
                 std::string_view b_h) {
    mat(w_z, p.W_z());
    mat(w_r, p.W_r());
    mat(w_h, p.W_h());
    mat(u_z, p.U_z());
    mat(u_r, p.U_r());
    mat(u_h, p.U_h());
    vec(b_z, p.b_z());
    vec(b_r, p.b_r());
    vec(b_h, p.b_h());
  };
  gru(enc, "enc.W_z", "enc.W_r", "enc.W_h", "enc.U_z", "enc.U_r", "enc.U_h",
      "enc.b_z", "enc.b_r", "enc.b_h");
  gru(dec, "dec.W_z", "dec.W_r", "dec.W_h", "dec.U_z", "dec.U_r", "dec.U_h",
      "dec.b_z", "dec.b_r", "dec.b_h");
  mat("out.w", out_w);
  vec("out.b", out_b);
}

}  // namespace seqguard
