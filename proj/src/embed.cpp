// SPDX-License-Identifier: Apache-2.0
#include "seqguard/embed.hpp"

#include <cctype>

#include "seqguard/error.hpp"

namespace seqguard {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  char prev = '\0';
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (!std::isalnum(c)) {
      flush();
    } else {
      if (std::isupper(c) && std::islower(static_cast<unsigned char>(prev)))
        flush();
      current.push_back(static_cast<char>(std::tolower(c)));
    }
    prev = ch;
  }
  flush();
  return tokens;
}

Vector hash_embed(std::string_view text, int dim, std::uint64_t seed) {
  if (dim < 8)
    throw PreconditionError("hash_embed: dim must be >= 8, got " +
                            std::to_string(dim));
  Vector v = Vector::Zero(dim);
  const std::uint64_t streams[2] = {mix64(seed * 2 + 1), mix64(seed * 2 + 2)};
  for (const auto& token : tokenize(text)) {
    for (std::uint64_t stream : streams) {
      const std::uint64_t h = hash_bytes(token, stream);
      const auto index = static_cast<Eigen::Index>(h % static_cast<unsigned>(dim));
      v[index] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  const double norm = v.norm();
  if (norm == 0.0) return Vector::Zero(dim);
  return v / norm;
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 8)
    throw PreconditionError("HashEmbedder: dim must be >= 8, got " +
                            std::to_string(dim));
}

void EmbeddingTable::add(EmbeddedRecord entry) {
  if (entry.steps.rows() == 0)
    throw PreconditionError("embedding '" + entry.id + "' has no steps");
  if (entry.task.size() != dim_ || entry.steps.cols() != dim_) {
    throw DimensionError("embedding '" + entry.id + "': expected dim " +
                         std::to_string(dim_) + ", got task " +
                         std::to_string(entry.task.size()) + " and steps " +
                         shape_of(entry.steps));
  }
  if (index_.count(entry.id))
    throw PreconditionError("duplicate embedding id '" + entry.id + "'");
  index_.emplace(entry.id, entries_.size());
  entries_.push_back(std::move(entry));
}

const EmbeddedRecord* EmbeddingTable::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const EmbeddedRecord& EmbeddingTable::at(const std::string& id) const {
  if (const auto* e = find(id)) return *e;
  throw PreconditionError("no embedding for record '" + id + "'");
}

EmbeddingTable embed_dataset(const std::vector<TrajectoryRecord>& records,
                             const EmbeddingProvider& provider) {
  EmbeddingTable table(provider.dim());
  for (const auto& rec : records) {
    try {
      EmbeddedRecord e{rec.id, provider.embed(rec.task),
                       Matrix(static_cast<Eigen::Index>(rec.steps.size()),
                              provider.dim())};
      for (std::size_t i = 0; i < rec.steps.size(); ++i)
        e.steps.row(static_cast<Eigen::Index>(i)) =
            provider.embed(rec.steps[i]).transpose();
      table.add(std::move(e));
    } catch (const Error& err) {
      throw Error(err.kind(), "record '" + rec.id + "': " + err.what());
    } catch (const std::exception& err) {
      throw Error("provider", "record '" + rec.id + "': " + err.what());
    }
  }
  return table;
}

EmbeddingTable align_embeddings(const std::vector<TrajectoryRecord>& records,
                                const EmbeddingTable& table) {
  EmbeddingTable out(table.dim());
  for (const auto& rec : records) {
    const auto& e = table.at(rec.id);
    if (static_cast<std::size_t>(e.steps.rows()) != rec.steps.size()) {
      throw PreconditionError("record '" + rec.id + "' has " +
                              std::to_string(rec.steps.size()) +
                              " steps but its embedding has " +
                              std::to_string(e.steps.rows()));
    }
    out.add(e);
  }
  return out;
}

namespace {

Vector parse_vector(const Json& arr, const char* field, std::size_t line) {
  if (!arr.is_array()) throw FormatError(std::string(field) + " is not an array", line);
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw FormatError(std::string(field) + " holds a non-number", line);
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  if (!v.allFinite()) throw FormatError(std::string(field) + " is not finite", line);
  return v;
}

Json vector_json(const auto& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(round_f32(v[i]));
  return arr;
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  EmbeddingTable table;
  bool first = true;
  for_each_jsonl(path, [&](const Json& doc, std::size_t line) {
    if (!doc.is_object()) throw FormatError("expected an object", line);
    if (!doc.contains("id") || !doc["id"].is_string())
      throw FormatError("missing string field 'id'", line);
    EmbeddedRecord e;
    e.id = doc["id"].get<std::string>();
    if (!doc.contains("task_vec")) throw FormatError("missing 'task_vec'", line);
    e.task = parse_vector(doc["task_vec"], "task_vec", line);
    const Json& steps = doc.value("step_vecs", Json());
    if (!steps.is_array() || steps.empty())
      throw FormatError("'step_vecs' must be a non-empty array", line);
    if (first) {
      table = EmbeddingTable(static_cast<int>(e.task.size()));
      first = false;
    }
    const int dim = table.dim();
    if (e.task.size() != dim)
      throw FormatError("dimension mismatch: task_vec has " +
                            std::to_string(e.task.size()) + ", expected " +
                            std::to_string(dim),
                        line);
    e.steps = Matrix(static_cast<Eigen::Index>(steps.size()), dim);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      Vector s = parse_vector(steps[i], "step_vecs", line);
      if (s.size() != dim)
        throw FormatError("dimension mismatch: step " + std::to_string(i) +
                              " has " + std::to_string(s.size()) +
                              ", expected " + std::to_string(dim),
                          line);
      e.steps.row(static_cast<Eigen::Index>(i)) = s.transpose();
    }
    if (table.find(e.id)) throw FormatError("duplicate id '" + e.id + "'", line);
    table.add(std::move(e));
  });
  return table;
}

void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingTable& table) {
  std::string text;
  for (const auto& e : table) {
    Json steps = Json::array();
    for (Eigen::Index r = 0; r < e.steps.rows(); ++r)
      steps.push_back(vector_json(e.steps.row(r)));
    Json doc{{"id", e.id}, {"task_vec", vector_json(e.task)}, {"step_vecs", steps}};
    text += doc.dump();
    text += '\n';
  }
  write_file(path, text);
}

}  // namespace seqguard
