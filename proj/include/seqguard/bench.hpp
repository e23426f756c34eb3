// SPDX-License-Identifier: Apache-2.0
//
// Per-sample latency measurement on a monotonic clock.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "seqguard/dataset.hpp"
#include "seqguard/embed.hpp"
#include "seqguard/io.hpp"
#include "seqguard/score.hpp"

namespace seqguard {

struct LatencyReport {
  std::string what;
  std::size_t count = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::string hardware;

  Json to_json() const;
};

/// Nearest-rank percentile of an ascending sample, p in (0, 100].
double nearest_rank(const std::vector<double>& sorted, double p);

/// Summary statistics of per-call milliseconds. Throws PreconditionError
/// on an empty sample.
LatencyReport summarize_latency(std::vector<double> samples_ms, std::string what);

/// Runs `call(i)` for i in [0, warmup) untimed, then times `reps` calls
/// individually. Throws PreconditionError when reps < 100.
LatencyReport time_calls(const std::function<void(std::size_t)>& call,
                         std::size_t warmup, std::size_t reps, std::string what);

/// CPU model and logical core count, best effort.
std::string hardware_description();

/// Times score_parts + fuse + classify per sample on precomputed
/// embeddings, cycling through `examples`.
LatencyReport bench_latency(const GuardModel& m, const CalibrationArtifact& cal,
                            const std::vector<Example>& examples,
                            std::size_t warmup = 50, std::size_t reps = 1000);

/// Same loop with embedding of the task and every step included.
LatencyReport bench_embed_and_score(const GuardModel& m, const CalibrationArtifact& cal,
                                    const EmbeddingProvider& provider,
                                    const std::vector<TrajectoryRecord>& records,
                                    std::size_t warmup = 50, std::size_t reps = 1000);

}  // namespace seqguard
