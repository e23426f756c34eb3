// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "seqguard/error.hpp"
#include "seqguard/score.hpp"

using namespace seqguard;
using namespace seqguard::testing;

namespace {

constexpr Label G = Label::good;
constexpr Label A = Label::anomaly;

double sig(double a) { return 1.0 / (1.0 + std::exp(-a)); }

}  // namespace

TEST_CASE("score_parts on the zero model") {
  const GuardModel m = GuardModel::zeros({4, 3, 2});
  Vector task = Vector::Zero(4);
  task[0] = 1.0;
  Matrix steps(2, 4);
  steps << 1, 0, 0, 0, 0, 2, 0, 0;
  const ScoreParts p = score_parts(m, task, steps);
  CHECK(p.d_contrastive == 0.0);
  // Reconstructions are all zero.
  CHECK(p.e_recon == doctest::Approx(5.0 / 8.0).epsilon(1e-15));
  CHECK_THROWS_AS(score_parts(m, task, Matrix(0, 4)), PreconditionError);
  CHECK_THROWS_AS(score_parts(m, Vector::Zero(3), steps), DimensionError);
}

TEST_CASE("score_parts: v_t equals v_s by construction") {
  // Encoder with only b_h = 0.4 and b_z large: h1 ≈ tanh(0.4) regardless of input.
  GuardModel m = GuardModel::zeros({1, 1, 1});
  m.enc.b_h()[0] = 0.4;
  m.enc.b_z()[0] = 50.0;
  const double h1 = (1.0 - sig(50.0)) * 0.0 + sig(50.0) * std::tanh(0.4);
  m.task_b2 << h1;
  Vector task(1);
  task << 0.9;
  Matrix steps(1, 1);
  steps << -0.3;
  CHECK(score_parts(m, task, steps).d_contrastive == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("score_parts: 1-dim model by hand") {
  GuardModel m = GuardModel::zeros({1, 1, 1});
  m.task_w1 << 2.0;
  m.task_w2 << 1.5;
  m.enc.W_h()(0, 0) = 1.0;  // z = r = 0.5
  m.dec.b_h()[0] = 0.2;     // decoder ignores its inputs
  m.out_w << 1.0;
  Vector task(1);
  task << 0.5;
  Matrix steps(2, 1);
  steps << 1.0, -1.0;
  const double v_t = 1.5 * std::tanh(1.0);
  const double e1 = 0.5 * std::tanh(1.0);
  const double v_s = 0.5 * e1 + 0.5 * std::tanh(-1.0);
  const double d1 = 0.5 * v_s + 0.5 * std::tanh(0.2);
  const double d2 = 0.5 * d1 + 0.5 * std::tanh(0.2);
  const double e = ((d1 - 1.0) * (d1 - 1.0) + (d2 + 1.0) * (d2 + 1.0)) / 2.0;
  const ScoreParts p = score_parts(m, task, steps);
  CHECK(p.d_contrastive == doctest::Approx(std::abs(v_t - v_s)).epsilon(1e-14));
  CHECK(p.e_recon == doctest::Approx(e).epsilon(1e-14));
}

TEST_CASE("fuse examples") {
  CalibrationArtifact cal;
  cal.beta = 0.5;
  CHECK(fuse({2.0, 4.0}, cal) == 4.0);
  cal = {0.3, 0.2, 1.1, 0.7, 2.0, 0.0, 0.0};
  CHECK(fuse({0.3, 1.1}, cal) == 0.0);
  cal.beta = 0.0;
  CHECK(fuse({0.7, 99.0}, cal) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("fuse is strictly increasing in each part") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    CalibrationArtifact cal{rng.uniform(), rng.uniform(0.01, 2), rng.uniform(),
                            rng.uniform(0.01, 2), rng.uniform(0.01, 4), 0, 0};
    const ScoreParts p{rng.uniform(0, 3), rng.uniform(0, 3)};
    const double d = rng.uniform(1e-6, 1.0);
    CHECK(fuse({p.d_contrastive + d, p.e_recon}, cal) > fuse(p, cal));
    CHECK(fuse({p.d_contrastive, p.e_recon + d}, cal) > fuse(p, cal));
  }
}

TEST_CASE("classify uses a strict inequality and is monotone") {
  CHECK(classify(0.5, 0.5) == G);
  CHECK(classify(std::nextafter(0.5, 1.0), 0.5) == A);
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = rng.uniform(-1, 1), s1 = rng.uniform(-2, 2), s2 = s1 + rng.uniform(0, 1);
    if (classify(s1, t) == A) CHECK(classify(s2, t) == A);
  }
}

TEST_CASE("separable sweep picks the midpoint") {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  const std::vector<Label> l = {G, G, A, A};
  const ThresholdChoice c = sweep_threshold(s, l);
  CHECK(c.threshold == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.f1 == 1.0);
}

TEST_CASE("anomalies below goods fall back to flagging everything") {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.8, 0.9};
  const std::vector<Label> l = {A, A, G, G, G};
  const ThresholdChoice c = sweep_threshold(s, l);
  // Flag all: P = 2/5, R = 1.
  CHECK(c.threshold == doctest::Approx(-0.9).epsilon(1e-15));
  CHECK(c.f1 == oracle_f1(2, 3, 0));
  CHECK(c.f1 == doctest::Approx(2 * 0.4 / 1.4).epsilon(1e-15));
}

TEST_CASE("sweep and calibrate match the exhaustive oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(2, 40));
    std::vector<ScoreParts> parts(n);
    std::vector<Label> labels(n);
    const bool ties = trial % 3 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng.uniform() < 0.5 ? A : G;
      parts[i] = ties ? ScoreParts{static_cast<double>(rng.below(4)),
                                   static_cast<double>(rng.below(3))}
                      : ScoreParts{rng.uniform(0, 2), rng.uniform(0, 2)};
    }
    labels[0] = G;
    labels[1] = A;
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = parts[i].d_contrastive;
    const ThresholdChoice sc = sweep_threshold(raw, labels);
    const ThresholdChoice so = oracle_sweep(raw, labels);
    CHECK(sc.f1 == so.f1);
    CHECK(sc.threshold == so.threshold);

    const CalibrationArtifact got = calibrate(parts, labels);
    const CalibrationArtifact want = oracle_calibrate(parts, labels, default_beta_grid());
    CHECK(got.val_f1 == want.val_f1);
    CHECK(got.beta == want.beta);
    CHECK(got.threshold == want.threshold);
    CHECK(got.mu_c == want.mu_c);
    CHECK(got.sigma_r == want.sigma_r);
  }
}

TEST_CASE("calibrate statistics use goods only and floor sigma") {
  const std::vector<ScoreParts> parts = {{1, 2}, {1, 2}, {5, 9}};
  const std::vector<Label> labels = {G, G, A};
  const auto cal = calibrate(parts, labels);
  CHECK(cal.mu_c == 1.0);
  CHECK(cal.mu_r == 2.0);
  CHECK(cal.sigma_c == kSigmaFloor);
  CHECK(cal.val_f1 == 1.0);
  CHECK(cal.beta == 0.25);
  const std::vector<Label> one_class = {G, G, G};
  CHECK_THROWS_AS(calibrate(parts, one_class), PreconditionError);
}

TEST_CASE("calibration artifact round trip and errors") {
  const auto dir = scratch_dir("calibration");
  const CalibrationArtifact cal{0.123456789, 0.5, 2.25, 1e-9, 0.5, -0.318, 0.875};
  save_calibration(cal, dir / "c.json");
  const auto back = load_calibration(dir / "c.json");
  CHECK(back.mu_c == cal.mu_c);
  CHECK(back.sigma_r == cal.sigma_r);
  CHECK(back.threshold == cal.threshold);
  CHECK(back.val_f1 == cal.val_f1);
  CHECK(classify(fuse({0.2, 2.0}, back), back.threshold) ==
        classify(fuse({0.2, 2.0}, cal), cal.threshold));

  Json j = Json::parse(read_file(dir / "c.json"));
  j["version"] = 2;
  write_file(dir / "v.json", j.dump());
  CHECK_THROWS_AS(load_calibration(dir / "v.json"), VersionError);
  j["version"] = 1;
  j["sigma_c"] = 0.0;
  write_file(dir / "s.json", j.dump());
  CHECK_THROWS_AS(load_calibration(dir / "s.json"), FormatError);
  j.erase("sigma_c");
  write_file(dir / "m.json", j.dump());
  CHECK_THROWS_AS(load_calibration(dir / "m.json"), FormatError);
}
