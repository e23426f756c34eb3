// SPDX-License-Identifier: Apache-2.0
#include "seqguard/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "seqguard/error.hpp"

namespace seqguard {

Json LatencyReport::to_json() const {
  return Json{{"what", what},       {"count", count},   {"mean_ms", mean_ms},
              {"p50_ms", p50_ms},   {"p95_ms", p95_ms}, {"min_ms", min_ms},
              {"max_ms", max_ms},   {"hardware", hardware}};
}

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw PreconditionError("nearest_rank: empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LatencyReport summarize_latency(std::vector<double> samples_ms, std::string what) {
  if (samples_ms.empty()) throw PreconditionError("summarize_latency: no samples");
  std::sort(samples_ms.begin(), samples_ms.end());
  LatencyReport r;
  r.what = std::move(what);
  r.count = samples_ms.size();
  r.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
              static_cast<double>(samples_ms.size());
  r.p50_ms = nearest_rank(samples_ms, 50.0);
  r.p95_ms = nearest_rank(samples_ms, 95.0);
  r.min_ms = samples_ms.front();
  r.max_ms = samples_ms.back();
  r.hardware = hardware_description();
  return r;
}

LatencyReport time_calls(const std::function<void(std::size_t)>& call,
                         std::size_t warmup, std::size_t reps, std::string what) {
  if (reps < 100) throw PreconditionError("benchmark needs at least 100 reps");
  for (std::size_t i = 0; i < warmup; ++i) call(i);
  std::vector<double> ms;
  ms.reserve(reps);
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = clock::now();
    call(warmup + i);
    const auto t1 = clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return summarize_latency(std::move(ms), std::move(what));
}

std::string hardware_description() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(line.find_first_not_of(' ', colon + 1));
      break;
    }
  }
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " logical cores";
}

namespace {

// Keeps the optimizer from discarding the timed work.
volatile int g_sink = 0;

}  // namespace

LatencyReport bench_latency(const GuardModel& m, const CalibrationArtifact& cal,
                            const std::vector<Example>& examples, std::size_t warmup,
                            std::size_t reps) {
  if (examples.empty()) throw PreconditionError("bench_latency: empty dataset");
  return time_calls(
      [&](std::size_t i) {
        const Example& ex = examples[i % examples.size()];
        const double s = fuse(score_parts(m, ex.task, ex.steps), cal);
        g_sink = g_sink + (classify(s, cal.threshold) == Label::anomaly ? 1 : 0);
      },
      warmup, reps, "score_only");
}

LatencyReport bench_embed_and_score(const GuardModel& m, const CalibrationArtifact& cal,
                                    const EmbeddingProvider& provider,
                                    const std::vector<TrajectoryRecord>& records,
                                    std::size_t warmup, std::size_t reps) {
  if (records.empty()) throw PreconditionError("bench_embed_and_score: empty dataset");
  return time_calls(
      [&](std::size_t i) {
        const TrajectoryRecord& rec = records[i % records.size()];
        const Vector task = provider.embed(rec.task);
        const auto n = std::min<Eigen::Index>(static_cast<Eigen::Index>(rec.steps.size()),
                                              kMaxSteps);
        Matrix steps(n, provider.dim());
        for (Eigen::Index k = 0; k < n; ++k)
          steps.row(k) = provider.embed(rec.steps[static_cast<std::size_t>(k)]).transpose();
        const double s = fuse(score_parts(m, task, steps), cal);
        g_sink = g_sink + (classify(s, cal.threshold) == Label::anomaly ? 1 : 0);
      },
      warmup, reps, "embed_and_score");
}

}  // namespace seqguard
