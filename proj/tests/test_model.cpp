// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "seqguard/error.hpp"
#include "seqguard/io.hpp"
#include "seqguard/model.hpp"

using namespace seqguard;
using namespace seqguard::testing;

namespace {

double sig(double a) { return 1.0 / (1.0 + std::exp(-a)); }

struct Scalar {
  double wz, wr, wh, uz, ur, uh, bz, br, bh;
};

void set_scalar(GruCellParams& p, const Scalar& s) {
  p.W_z()(0, 0) = s.wz;
  p.W_r()(0, 0) = s.wr;
  p.W_h()(0, 0) = s.wh;
  p.U_z()(0, 0) = s.uz;
  p.U_r()(0, 0) = s.ur;
  p.U_h()(0, 0) = s.uh;
  p.b_z()[0] = s.bz;
  p.b_r()[0] = s.br;
  p.b_h()[0] = s.bh;
}

double step(const Scalar& s, double x, double h) {
  const double z = sig(s.wz * x + s.uz * h + s.bz);
  const double r = sig(s.wr * x + s.ur * h + s.br);
  const double c = std::tanh(s.wh * x + s.uh * r * h + s.bh);
  return (1.0 - z) * h + z * c;
}

GuardModel toy_model(std::uint64_t seed) {
  GuardModel m = GuardModel::initialized({6, 5, 4}, seed);
  Rng rng(seed + 100);
  m.visit([&](const TensorView& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] += rng.uniform(-0.3, 0.3);
  });
  return m;
}

}  // namespace

TEST_CASE("zero model maps everything to zero") {
  const GuardModel m = GuardModel::zeros({6, 5, 4});
  Rng rng(1);
  CHECK(encode_task(random_vector(6, rng, 5.0), m) == Vector::Zero(4));
  const Matrix steps = random_matrix(7, 6, rng, 3.0);
  CHECK(encode_trajectory(steps, m) == Vector::Zero(4));
  CHECK(decode_trajectory(random_vector(4, rng), steps, m) == Matrix::Zero(7, 6));
}

TEST_CASE("encode_task: D=2, L=1 by hand") {
  GuardModel m = GuardModel::zeros({2, 1, 1});
  m.task_w1 << 1.0, 2.0;
  m.task_b1 << 0.5;
  m.task_w2 << 3.0;
  m.task_b2 << -1.0;
  Vector x(2);
  x << 0.5, -0.25;
  // 0.5 - 0.5 + 0.5 = 0.5
  const double expected = 3.0 * std::tanh(0.5) - 1.0;
  CHECK(encode_task(x, m)[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(encode_task(x, m) == encode_task(x, m));
  CHECK_THROWS_AS(encode_task(Vector::Zero(3), m), DimensionError);
}

TEST_CASE("encode_trajectory: single step equals gru_step") {
  const GuardModel m = toy_model(2);
  Rng rng(3);
  const Matrix s = random_matrix(1, 6, rng);
  CHECK(encode_trajectory(s, m) == gru_step(s.row(0).transpose(), Vector::Zero(4), m.enc));
}

TEST_CASE("encode_trajectory: 3-step 1-dim unroll by hand") {
  GuardModel m = GuardModel::zeros({1, 1, 1});
  const Scalar s{0.8, -0.6, 1.2, 0.5, 0.9, -0.7, 0.1, -0.2, 0.05};
  set_scalar(m.enc, s);
  Matrix steps(3, 1);
  steps << 1.0, -0.5, 2.0;
  const double h1 = step(s, 1.0, 0.0);
  const double h2 = step(s, -0.5, h1);
  const double h3 = step(s, 2.0, h2);
  CHECK(encode_trajectory(steps, m)[0] == doctest::Approx(h3).epsilon(1e-14));
}

TEST_CASE("encode_trajectory preconditions") {
  const GuardModel m = toy_model(4);
  CHECK_THROWS_AS(encode_trajectory(Matrix(0, 6), m), PreconditionError);
  CHECK_THROWS_AS(encode_trajectory(Matrix::Zero(kMaxSteps + 1, 6), m), PreconditionError);
  CHECK_THROWS_AS(encode_trajectory(Matrix::Zero(2, 5), m), DimensionError);
}

TEST_CASE("decode_trajectory: 2-step 1-dim teacher forcing by hand") {
  GuardModel m = GuardModel::zeros({1, 1, 1});
  const Scalar s{0.4, 0.3, -1.1, 0.6, -0.2, 0.8, 0.0, 0.1, -0.3};
  set_scalar(m.dec, s);
  m.out_w << 2.0;
  m.out_b << 0.1;
  Vector v_s(1);
  v_s << 0.3;
  Matrix teacher(2, 1);
  teacher << 0.7, -0.4;
  const double h1 = step(s, 0.0, 0.3);
  const double h2 = step(s, 0.7, h1);
  const Matrix out = decode_trajectory(v_s, teacher, m);
  REQUIRE(out.rows() == 2);
  CHECK(out(0, 0) == doctest::Approx(2.0 * h1 + 0.1).epsilon(1e-14));
  CHECK(out(1, 0) == doctest::Approx(2.0 * h2 + 0.1).epsilon(1e-14));
}

TEST_CASE("decoder_inputs shifts by one with a zero first row") {
  Matrix s(3, 2);
  s << 1, 2, 3, 4, 5, 6;
  Matrix expected(3, 2);
  expected << 0, 0, 1, 2, 3, 4;
  CHECK(decoder_inputs(s) == expected);
}

TEST_CASE("decode output count equals input step count") {
  const GuardModel m = toy_model(5);
  Rng rng(6);
  for (Eigen::Index n : {Eigen::Index{1}, Eigen::Index{2}, Eigen::Index{17}, kMaxSteps}) {
    const Matrix s = random_matrix(n, 6, rng);
    const Matrix r = decode_trajectory(encode_trajectory(s, m), s, m);
    CHECK(r.rows() == n);
    CHECK(r.cols() == 6);
  }
}

TEST_CASE("encode_trajectory is order-sensitive") {
  Rng rng(7);
  int changed = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const GuardModel m = toy_model(10 + trial);
    const Matrix s = random_matrix(4, 6, rng);
    Matrix p = s;
    p.row(0).swap(p.row(3));
    if ((encode_trajectory(s, m) - encode_trajectory(p, m)).norm() > 1e-9) ++changed;
  }
  CHECK(changed == 20);
}

TEST_CASE("flatten and assign are inverse") {
  const GuardModel m = toy_model(8);
  GuardModel z = GuardModel::zeros(m.dims);
  z.assign(m.flatten());
  CHECK(z.flatten() == m.flatten());
  CHECK(m.parameter_count() == m.flatten().size());
  CHECK_THROWS_AS(z.assign(Vector::Zero(3)), DimensionError);
  std::size_t n = 0;
  m.visit([&](const TensorView& t) { CHECK(t.name == tensor_names()[n++]); });
  CHECK(n == tensor_names().size());
}

TEST_CASE("checkpoint round trip") {
  const auto dir = scratch_dir("checkpoint");
  const GuardModel m = toy_model(9);
  save_checkpoint(m, dir / "m.json");
  const GuardModel back = load_checkpoint(dir / "m.json");
  CHECK(back.dims == m.dims);
  CHECK(back.seed == m.seed);
  CHECK((back.flatten() - m.flatten()).cwiseAbs().maxCoeff() <= std::ldexp(1.0, -20));

  Rng rng(11);
  const Vector task = random_vector(6, rng);
  const Matrix s = random_matrix(5, 6, rng);
  CHECK((encode_task(task, back) - encode_task(task, m)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((encode_trajectory(s, back) - encode_trajectory(s, m)).cwiseAbs().maxCoeff() < 1e-6);

  // Rounded models survive exactly.
  GuardModel r = m;
  r.round_to_f32();
  save_checkpoint(r, dir / "r.json");
  CHECK(load_checkpoint(dir / "r.json").flatten() == r.flatten());
}

TEST_CASE("checkpoint errors") {
  const auto dir = scratch_dir("checkpoint-bad");
  const GuardModel m = toy_model(12);
  save_checkpoint(m, dir / "m.json");
  Json j = Json::parse(read_file(dir / "m.json"));

  Json v = j;
  v["version"] = 99;
  write_file(dir / "v.json", v.dump());
  CHECK_THROWS_AS(load_checkpoint(dir / "v.json"), VersionError);

  Json d = j;
  d["dims"]["d"] = 7;
  write_file(dir / "d.json", d.dump());
  CHECK_THROWS_AS(load_checkpoint(dir / "d.json"), DimensionError);

  Json t = j;
  t["tensors"].erase("out.b");
  write_file(dir / "t.json", t.dump());
  CHECK_THROWS_AS(load_checkpoint(dir / "t.json"), FormatError);

  write_file(dir / "garbage.json", "{\"version\":");
  CHECK_THROWS_AS(load_checkpoint(dir / "garbage.json"), FormatError);
}

TEST_CASE("clamp_steps truncates to the maximum") {
  const Matrix long_seq = Matrix::Ones(kMaxSteps + 5, 3);
  CHECK(clamp_steps(long_seq, "long").rows() == kMaxSteps);
  CHECK(clamp_steps(Matrix::Ones(4, 3), "short").rows() == 4);
}
