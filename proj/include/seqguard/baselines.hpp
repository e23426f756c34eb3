// SPDX-License-Identifier: Apache-2.0
//
// Order-blind reference detectors on mean-pooled step embeddings.
#pragma once

#include <cstdint>
#include <vector>

#include "seqguard/numcore.hpp"

namespace seqguard {

/// Per-dimension mean of the rows. Rows are summed in lexicographic order,
/// so any permutation of the steps gives a bitwise identical result.
/// Throws PreconditionError on an empty input.
Vector mean_pool(const Eigen::Ref<const Matrix>& step_vecs);

/// Average path length of an unsuccessful BST search over n points:
/// 2·H(n−1) − 2(n−1)/n, with c(1) = 0.
double iforest_c(std::size_t n);

struct IsolationForest {
  struct Node {
    int dim = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t size = 0;  // points that reached a leaf
  };
  using Tree = std::vector<Node>;  // node 0 is the root

  std::size_t trees = 100;
  std::size_t subsample = 256;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;  // min(subsample, n)
  int height_limit = 0;
  std::vector<Tree> forest;

  /// Mean over trees of the path length to the leaf `point` falls into,
  /// including the c(leaf size) adjustment.
  double expected_path_length(const Vector& point) const;
};

/// Throws PreconditionError with fewer than 2 points or zero trees.
IsolationForest iforest_fit(const std::vector<Vector>& points,
                            std::size_t trees = 100, std::size_t subsample = 256,
                            std::uint64_t seed = 0);

/// 2^(−E[h(x)] / c(ψ)), in (0, 1); higher is more anomalous.
double iforest_score(const IsolationForest& f, const Vector& point);

struct CentroidModel {
  Vector centroid;
};

/// Throws PreconditionError on an empty set.
CentroidModel centroid_fit(const std::vector<Vector>& points);
double centroid_score(const CentroidModel& c, const Vector& query);

}  // namespace seqguard
