// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "seqguard/baselines.hpp"
#include "seqguard/error.hpp"

using namespace seqguard;
using namespace seqguard::testing;

namespace {

std::vector<Vector> cluster(std::size_t n, int d, Rng& rng, double scale) {
  std::vector<Vector> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_vector(d, rng, scale));
  return pts;
}

// Routes `pts` through the tree, checking each internal split against the
// observed range of the points that reach it.
void check_node(const IsolationForest::Tree& tree, int id, const std::vector<Vector>& pts,
                int depth, int limit, int& max_depth) {
  const auto& node = tree[static_cast<std::size_t>(id)];
  CHECK(node.size == pts.size());
  max_depth = std::max(max_depth, depth);
  if (node.dim < 0) return;
  double lo = INFINITY, hi = -INFINITY;
  std::vector<Vector> left, right;
  for (const auto& p : pts) {
    lo = std::min(lo, p[node.dim]);
    hi = std::max(hi, p[node.dim]);
    (p[node.dim] < node.split ? left : right).push_back(p);
  }
  CHECK(node.split > lo);
  CHECK(node.split <= hi);
  CHECK(!left.empty());
  CHECK(!right.empty());
  check_node(tree, node.left, left, depth + 1, limit, max_depth);
  check_node(tree, node.right, right, depth + 1, limit, max_depth);
}

}  // namespace

TEST_CASE("mean_pool examples") {
  Matrix one(1, 3);
  one << 1, -2, 3;
  CHECK(mean_pool(one) == one.row(0).transpose());
  Matrix two(2, 2);
  two << 1, 0, 0, 1;
  CHECK(mean_pool(two) == Vector::Constant(2, 0.5));
  CHECK_THROWS_AS(mean_pool(Matrix(0, 2)), PreconditionError);
}

TEST_CASE("mean_pool is bitwise order-blind") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix s = random_matrix(rng.between(2, 12), 7, rng);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(s.rows()));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
    rng.shuffle(perm);
    Matrix p(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) p.row(i) = s.row(perm[static_cast<std::size_t>(i)]);
    CHECK(mean_pool(p) == mean_pool(s));
    CHECK((mean_pool(s) - s.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("average path length normaliser") {
  CHECK(iforest_c(1) == 0.0);
  CHECK(iforest_c(2) == 1.0);
  // 2·(1 + 1/2) − 2·2/3
  CHECK(iforest_c(3) == doctest::Approx(3.0 - 4.0 / 3.0).epsilon(1e-15));
  // Exact rational evaluation of 2·H(255) − 2·255/256.
  CHECK(iforest_c(256) == doctest::Approx(10.248689925634562).epsilon(1e-12));
}

TEST_CASE("expected path equal to c(n) scores one half") {
  IsolationForest f;
  f.sample_size = 16;
  f.forest = {IsolationForest::Tree{IsolationForest::Node{-1, 0.0, -1, -1, 16}}};
  Vector x = Vector::Zero(2);
  CHECK(f.expected_path_length(x) == iforest_c(16));
  CHECK(iforest_score(f, x) == 0.5);
}

TEST_CASE("planted outlier gets the highest score") {
  Rng rng(2);
  auto pts = cluster(200, 2, rng, 1.0);
  Vector outlier(2);
  outlier << 25.0, -30.0;
  pts.push_back(outlier);
  const auto f = iforest_fit(pts, 100, 256, 7);
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = iforest_score(f, pts[i]);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    if (s > best) {
      best = s;
      arg = i;
    }
  }
  CHECK(arg == pts.size() - 1);
}

TEST_CASE("score is monotone in expected path length") {
  Rng rng(3);
  const auto pts = cluster(100, 3, rng, 1.0);
  const auto f = iforest_fit(pts, 50, 64, 1);
  const auto queries = cluster(50, 3, rng, 3.0);
  for (std::size_t i = 0; i + 1 < queries.size(); ++i) {
    const double ha = f.expected_path_length(queries[i]);
    const double hb = f.expected_path_length(queries[i + 1]);
    if (ha < hb) CHECK(iforest_score(f, queries[i]) > iforest_score(f, queries[i + 1]));
  }
}

TEST_CASE("forest structure: height bound and split ranges") {
  Rng rng(4);
  const auto pts = cluster(64, 4, rng, 2.0);
  // subsample >= n so each tree sees every point.
  const auto f = iforest_fit(pts, 20, 64, 5);
  CHECK(f.height_limit == 6);
  CHECK(f.sample_size == 64);
  for (const auto& tree : f.forest) {
    int depth = 0;
    check_node(tree, 0, pts, 0, f.height_limit, depth);
    CHECK(depth <= f.height_limit);
  }
  const auto g = iforest_fit(cluster(1000, 4, rng, 1.0), 30, 256, 5);
  for (const auto& tree : g.forest)
    for (const auto& n : tree) CHECK(n.size <= 256);
  CHECK(g.height_limit == 8);
}

TEST_CASE("forest is deterministic given the seed") {
  Rng rng(5);
  const auto pts = cluster(300, 3, rng, 1.0);
  const auto a = iforest_fit(pts, 30, 128, 11);
  const auto b = iforest_fit(pts, 30, 128, 11);
  const auto c = iforest_fit(pts, 30, 128, 12);
  bool differs = false;
  for (const auto& q : cluster(20, 3, rng, 2.0)) {
    CHECK(iforest_score(a, q) == iforest_score(b, q));
    differs |= iforest_score(a, q) != iforest_score(c, q);
  }
  CHECK(differs);
}

TEST_CASE("identical points give single-leaf trees") {
  const std::vector<Vector> same(10, Vector::Ones(3));
  const auto f = iforest_fit(same, 5, 256, 0);
  for (const auto& tree : f.forest) CHECK(tree.size() == 1);
  CHECK(iforest_score(f, Vector::Ones(3)) == 0.5);
  CHECK_THROWS_AS(iforest_fit({Vector::Ones(3)}, 5, 256, 0), PreconditionError);
  CHECK_THROWS_AS(iforest_fit(same, 0, 256, 0), PreconditionError);
}

TEST_CASE("centroid examples") {
  Vector a(2), b(2), c(2);
  a << 1, 0;
  b << -1, 0;
  CHECK(centroid_score(centroid_fit({a, b}), Vector::Zero(2)) == 0.0);
  a << 0, 0;
  b << 3, 0;
  c << 0, 3;
  const auto m = centroid_fit({a, b, c});
  CHECK(centroid_score(m, m.centroid) == 0.0);
  Vector q(2);
  q << 4, 5;
  // centroid (1, 1) → distance 5
  CHECK(centroid_score(m, q) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(centroid_fit({}), PreconditionError);
}
