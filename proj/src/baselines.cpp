// SPDX-License-Identifier: Apache-2.0
#include "seqguard/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqguard/error.hpp"

namespace seqguard {

Vector mean_pool(const Eigen::Ref<const Matrix>& step_vecs) {
  if (step_vecs.rows() == 0) throw PreconditionError("mean_pool: empty trajectory");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(step_vecs.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < step_vecs.cols(); ++j) {
      if (step_vecs(a, j) != step_vecs(b, j)) return step_vecs(a, j) < step_vecs(b, j);
    }
    return false;
  });
  Vector sum = Vector::Zero(step_vecs.cols());
  for (Eigen::Index r : order) sum += step_vecs.row(r).transpose();
  return sum / static_cast<double>(step_vecs.rows());
}

double iforest_c(std::size_t n) {
  if (n <= 1) return 0.0;
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= n - 1; ++i) harmonic += 1.0 / static_cast<double>(i);
  const double nd = static_cast<double>(n);
  return 2.0 * harmonic - 2.0 * (nd - 1.0) / nd;
}

namespace {

int build(IsolationForest::Tree& tree, const std::vector<Vector>& points,
          std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth,
          int limit, Rng& rng) {
  const int id = static_cast<int>(tree.size());
  tree.push_back({});
  const std::size_t n = hi - lo;
  if (depth >= limit || n <= 1) {
    tree[static_cast<std::size_t>(id)].size = n;
    return id;
  }
  const Eigen::Index dims = points[idx[lo]].size();
  std::vector<int> candidates;
  Vector mins = points[idx[lo]], maxs = points[idx[lo]];
  for (std::size_t k = lo + 1; k < hi; ++k) {
    mins = mins.cwiseMin(points[idx[k]]);
    maxs = maxs.cwiseMax(points[idx[k]]);
  }
  for (Eigen::Index d = 0; d < dims; ++d)
    if (maxs[d] > mins[d]) candidates.push_back(static_cast<int>(d));
  if (candidates.empty()) {
    tree[static_cast<std::size_t>(id)].size = n;
    return id;
  }
  const int dim = candidates[rng.below(candidates.size())];
  double split = rng.uniform(mins[dim], maxs[dim]);
  if (split <= mins[dim]) split = std::nextafter(mins[dim], maxs[dim]);
  const auto mid_it = std::partition(
      idx.begin() + static_cast<std::ptrdiff_t>(lo),
      idx.begin() + static_cast<std::ptrdiff_t>(hi),
      [&](std::size_t p) { return points[p][dim] < split; });
  const auto mid = static_cast<std::size_t>(mid_it - idx.begin());
  const int left = build(tree, points, idx, lo, mid, depth + 1, limit, rng);
  const int right = build(tree, points, idx, mid, hi, depth + 1, limit, rng);
  auto& node = tree[static_cast<std::size_t>(id)];
  node.dim = dim;
  node.split = split;
  node.left = left;
  node.right = right;
  node.size = n;
  return id;
}

}  // namespace

IsolationForest iforest_fit(const std::vector<Vector>& points, std::size_t trees,
                            std::size_t subsample, std::uint64_t seed) {
  if (points.size() < 2) throw PreconditionError("iforest_fit: need at least 2 points");
  if (trees == 0 || subsample < 2)
    throw PreconditionError("iforest_fit: trees must be >= 1 and subsample >= 2");
  for (const auto& p : points)
    if (p.size() != points.front().size())
      throw DimensionError("iforest_fit: points have differing dimensions");
  IsolationForest f;
  f.trees = trees;
  f.subsample = subsample;
  f.seed = seed;
  f.sample_size = std::min(subsample, points.size());
  f.height_limit =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(f.sample_size))));
  Rng base = Rng(seed).split("iforest");
  std::vector<std::size_t> all(points.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng = base.split(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> idx = all;
    rng.shuffle(idx);
    idx.resize(f.sample_size);
    IsolationForest::Tree tree;
    build(tree, points, idx, 0, idx.size(), 0, f.height_limit, rng);
    f.forest.push_back(std::move(tree));
  }
  return f;
}

double IsolationForest::expected_path_length(const Vector& point) const {
  double total = 0.0;
  for (const Tree& tree : forest) {
    int node = 0;
    int depth = 0;
    while (tree[static_cast<std::size_t>(node)].dim >= 0) {
      const Node& n = tree[static_cast<std::size_t>(node)];
      if (n.dim >= point.size())
        throw DimensionError("iforest: point has " + std::to_string(point.size()) +
                             " dims");
      node = point[n.dim] < n.split ? n.left : n.right;
      ++depth;
    }
    total += depth + iforest_c(tree[static_cast<std::size_t>(node)].size);
  }
  return total / static_cast<double>(forest.size());
}

double iforest_score(const IsolationForest& f, const Vector& point) {
  if (f.forest.empty()) throw PreconditionError("iforest_score: forest is not fitted");
  return std::exp2(-f.expected_path_length(point) / iforest_c(f.sample_size));
}

CentroidModel centroid_fit(const std::vector<Vector>& points) {
  if (points.empty()) throw PreconditionError("centroid_fit: no points");
  Vector sum = Vector::Zero(points.front().size());
  for (const auto& p : points) {
    if (p.size() != sum.size())
      throw DimensionError("centroid_fit: points have differing dimensions");
    sum += p;
  }
  return {sum / static_cast<double>(points.size())};
}

double centroid_score(const CentroidModel& c, const Vector& query) {
  if (query.size() != c.centroid.size())
    throw DimensionError("centroid_score: query has " + std::to_string(query.size()) +
                         " dims, centroid " + std::to_string(c.centroid.size()));
  return (query - c.centroid).norm();
}

}  // namespace seqguard
