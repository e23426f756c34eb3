// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "seqguard/embed.hpp"
#include "seqguard/record.hpp"

namespace seqguard {

/// A labeled, embedded trajectory: the unit every model consumes.
struct Example {
  std::string id;
  Vector task;
  Matrix steps;  // one row per step, at most kMaxSteps rows
  Label label = Label::good;
  std::string source;
};

/// Joins records with their embeddings, in record order. Trajectories
/// longer than kMaxSteps are truncated with a warning. Throws
/// PreconditionError when an embedding is missing or its step count
/// differs from the record.
std::vector<Example> join_examples(const std::vector<TrajectoryRecord>& records,
                                   const EmbeddingTable& table);

std::vector<Label> labels_of(const std::vector<Example>& examples);

std::vector<Example> filter_label(const std::vector<Example>& examples, Label label);

}  // namespace seqguard
