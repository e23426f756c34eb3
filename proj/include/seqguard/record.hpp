// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqguard/io.hpp"

namespace seqguard {

enum class Label { good, anomaly };

std::string_view to_string(Label label);
/// Throws FormatError for anything but "good" / "anomaly".
Label parse_label(std::string_view text);

/// A task and the ordered agent steps produced for it.
struct TrajectoryRecord {
  std::string id;
  std::string task;
  std::vector<std::string> steps;
  Label label = Label::good;
  std::string source;
  /// Indices into `steps` that were injected or corrupted. Anomalies only.
  std::vector<std::size_t> injected_positions;

  /// Throws PreconditionError when the record breaks its invariants.
  void validate() const;

  bool operator==(const TrajectoryRecord&) const = default;
};

Json to_json(const TrajectoryRecord& rec);
TrajectoryRecord record_from_json(const Json& doc);

/// Dataset JSONL: one TrajectoryRecord object per line.
std::vector<TrajectoryRecord> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<TrajectoryRecord>& records);

}  // namespace seqguard
