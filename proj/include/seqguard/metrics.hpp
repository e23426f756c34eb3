// SPDX-License-Identifier: Apache-2.0
//
// Binary classification metrics with the anomaly class as positive.
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seqguard/io.hpp"
#include "seqguard/record.hpp"

namespace seqguard {

struct Confusion {
  std::size_t tp = 0;  // anomaly predicted anomaly
  std::size_t fp = 0;  // good predicted anomaly
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void add(Label predicted, Label truth);
};

/// 2·P·R / (P + R), or 0 when P + R is 0.
double f1_score(double precision, double recall);

/// Anomaly-class F1 computed from counts through precision and recall.
double anomaly_f1(const Confusion& c);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  /// Set when a zero denominator forced a metric to 0.
  bool undefined = false;
};

ClassMetrics anomaly_metrics(const Confusion& c);
ClassMetrics good_metrics(const Confusion& c);

struct BucketMetrics {
  std::string name;
  std::size_t min_steps = 0;
  std::size_t max_steps = 0;  // 0 = unbounded
  std::size_t count = 0;
  Confusion confusion;
  ClassMetrics anomaly;
};

struct EvalReport {
  std::size_t count = 0;
  Confusion confusion;
  ClassMetrics anomaly;
  ClassMetrics good;
  /// Per-class metrics averaged with class-support weights.
  ClassMetrics weighted;
  /// Anomaly-class metrics per source, and their average weighted by each
  /// source's record count.
  std::map<std::string, ClassMetrics> per_source;
  std::map<std::string, Confusion> per_source_confusion;
  ClassMetrics source_weighted;
  std::vector<BucketMetrics> length_buckets;
  double threshold = 0.0;
  double beta = 0.0;

  Json to_json() const;
};

/// Length buckets 2-5, 6-10 and 11+; single-step trajectories are counted
/// in the first bucket.
std::vector<BucketMetrics> empty_length_buckets();

/// `lengths` and `sources` may be empty; otherwise they align with
/// `predictions`. Throws DimensionError on misaligned inputs.
EvalReport compute_metrics(std::span<const Label> predictions,
                           std::span<const Label> labels,
                           std::span<const std::size_t> lengths = {},
                           std::span<const std::string> sources = {},
                           double threshold = 0.0, double beta = 0.0);

Json to_json(const ClassMetrics& m);
Json to_json(const Confusion& c);

}  // namespace seqguard
