// SPDX-License-Identifier: Apache-2.0
//
// Rule-based anomaly synthesis and an offline toy corpus.
//
// Two anomaly families are produced from a good trajectory:
//   contextual: 1..3 steps from a foreign domain inserted at random
//                 positions; the original steps keep their relative order.
//   structural: one step's arguments replaced by a dangerous or
//                 nonsensical payload, or two adjacent steps swapped.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqguard/record.hpp"
#include "seqguard/rng.hpp"

namespace seqguard {

/// Plausible step strings per domain tag.
struct StepPool {
  std::map<std::string, std::vector<std::string>> domains;

  /// Requires at least two domains with at least five steps each.
  void validate() const;
};

/// Pool covering every built-in toy domain.
const StepPool& builtin_step_pool();

/// Names of the built-in toy domains in generation order.
const std::vector<std::string>& builtin_domains();

/// The fixed list of dangerous / nonsense argument payloads.
const std::vector<std::string>& dangerous_payloads();

/// Domain whose pool shares the most tokens with the record's task and
/// steps; ties go to the lexicographically first domain.
std::string infer_domain(const TrajectoryRecord& rec, const StepPool& pool);

/// True for steps written as JSON tool calls.
bool is_tool_call(const std::string& step);

/// Inserts `k` (1..3) steps drawn from foreign domains at `k` distinct
/// uniformly drawn positions. Foreign domains written in the record's step
/// style are preferred. `domain` overrides domain inference.
TrajectoryRecord inject_contextual(const TrajectoryRecord& rec, int k,
                                   const StepPool& pool, Rng& rng,
                                   std::optional<std::string> domain = {});

enum class StructuralMode { malformed_args, order_swap };

std::string_view to_string(StructuralMode mode);

/// malformed_args replaces the argument span of one step: the "arguments"
/// member of a JSON tool call, or everything after the leading verb of a
/// natural-language step. order_swap exchanges two adjacent differing steps.
TrajectoryRecord corrupt_structural(const TrajectoryRecord& rec, Rng& rng,
                                    StructuralMode mode);

/// `n` good records over the first `domains` built-in domains, 2..8 steps
/// each with a bias toward short trajectories.
std::vector<TrajectoryRecord> gen_toy_corpus(std::size_t n, int domains, Rng& rng);

struct SynthConfig {
  int k_min = 1;
  int k_max = 3;
  /// Share of anomalies that are structural rather than contextual.
  double structural_frac = 0.5;
  std::uint64_t seed = 0;
};

/// Exactly one anomaly per input good record, in input order. Each record's
/// randomness is derived from (seed, record id) only.
std::vector<TrajectoryRecord> synthesize_anomalies(
    const std::vector<TrajectoryRecord>& goods, const SynthConfig& cfg,
    const StepPool& pool);

}  // namespace seqguard
