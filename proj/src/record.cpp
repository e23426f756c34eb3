// SPDX-License-Identifier: Apache-2.0
#include "seqguard/record.hpp"

#include <set>

#include "seqguard/error.hpp"

namespace seqguard {

std::string_view to_string(Label label) {
  return label == Label::good ? "good" : "anomaly";
}

Label parse_label(std::string_view text) {
  if (text == "good") return Label::good;
  if (text == "anomaly") return Label::anomaly;
  throw FormatError("unknown label '" + std::string(text) + "'");
}

void TrajectoryRecord::validate() const {
  if (steps.empty())
    throw PreconditionError("record " + id + " has no steps");
  if (label == Label::good && !injected_positions.empty())
    throw PreconditionError("good record " + id + " carries injected positions");
  if (label == Label::anomaly && injected_positions.empty())
    throw PreconditionError("anomaly record " + id +
                            " carries no injected positions");
  for (std::size_t p : injected_positions) {
    if (p >= steps.size())
      throw PreconditionError("record " + id + " injected position " +
                              std::to_string(p) + " out of range");
  }
}

Json to_json(const TrajectoryRecord& rec) {
  return Json{{"id", rec.id},
              {"task", rec.task},
              {"steps", rec.steps},
              {"label", std::string(to_string(rec.label))},
              {"source", rec.source},
              {"injected_positions", rec.injected_positions}};
}

TrajectoryRecord record_from_json(const Json& doc) {
  TrajectoryRecord rec;
  rec.id = doc.at("id").get<std::string>();
  rec.task = doc.at("task").get<std::string>();
  rec.steps = doc.at("steps").get<std::vector<std::string>>();
  rec.label = parse_label(doc.at("label").get<std::string>());
  rec.source = doc.value("source", std::string{});
  if (auto it = doc.find("injected_positions"); it != doc.end() && !it->is_null())
    rec.injected_positions = it->get<std::vector<std::size_t>>();
  return rec;
}

std::vector<TrajectoryRecord> read_dataset(const std::filesystem::path& path) {
  std::vector<TrajectoryRecord> out;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const Json& doc, std::size_t line) {
    TrajectoryRecord rec = record_from_json(doc);
    try {
      rec.validate();
    } catch (const PreconditionError& e) {
      throw FormatError(e.what(), line);
    }
    if (!seen.insert(rec.id).second)
      throw FormatError("duplicate id '" + rec.id + "'", line);
    out.push_back(std::move(rec));
  });
  return out;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<TrajectoryRecord>& records) {
  std::string text;
  for (const auto& rec : records) {
    text += to_json(rec).dump();
    text += '\n';
  }
  write_file(path, text);
}

}  // namespace seqguard
