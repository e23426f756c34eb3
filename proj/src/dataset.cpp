// SPDX-License-Identifier: Apache-2.0
#include "seqguard/dataset.hpp"

#include "seqguard/error.hpp"
#include "seqguard/model.hpp"

namespace seqguard {

std::vector<Example> join_examples(const std::vector<TrajectoryRecord>& records,
                                   const EmbeddingTable& table) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    const EmbeddedRecord& e = table.at(rec.id);
    if (static_cast<std::size_t>(e.steps.rows()) != rec.steps.size())
      throw PreconditionError("record '" + rec.id + "' has " +
                              std::to_string(rec.steps.size()) +
                              " steps but its embedding has " +
                              std::to_string(e.steps.rows()));
    out.push_back({rec.id, e.task, clamp_steps(e.steps, rec.id), rec.label,
                   rec.source});
  }
  return out;
}

std::vector<Label> labels_of(const std::vector<Example>& examples) {
  std::vector<Label> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.label);
  return out;
}

std::vector<Example> filter_label(const std::vector<Example>& examples, Label label) {
  std::vector<Example> out;
  for (const auto& ex : examples)
    if (ex.label == label) out.push_back(ex);
  return out;
}

}  // namespace seqguard
