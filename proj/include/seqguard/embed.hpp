// SPDX-License-Identifier: Apache-2.0
//
// Task and step embeddings. Vectors are frozen inputs to the model; the
// engine never trains the embedder. `HashEmbedder` is a deterministic
// offline stand-in, and externally computed sentence-encoder vectors enter
// through the embedding JSONL file.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqguard/numcore.hpp"
#include "seqguard/record.hpp"

namespace seqguard {

inline constexpr int kDefaultEmbeddingDim = 384;

/// Lowercased alphanumeric tokens. Splits on anything else and on
/// lower-to-upper case transitions, so "GetNewMusicReleases" yields
/// get / new / music / releases.
std::vector<std::string> tokenize(std::string_view text);

/// Signed feature hashing. Each token lands in two buckets drawn from two
/// independently seeded hash streams, each with its own ±1 sign; the sum is
/// L2-normalized. Text without tokens maps to the zero vector.
/// Throws PreconditionError when dim < 8.
Vector hash_embed(std::string_view text, int dim, std::uint64_t seed);

/// Source of sentence vectors. Implementations must be safe for concurrent
/// read-only use after construction.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  virtual Vector embed(std::string_view text) const = 0;
};

class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(int dim = kDefaultEmbeddingDim, std::uint64_t seed = 0);
  int dim() const override { return dim_; }
  Vector embed(std::string_view text) const override {
    return hash_embed(text, dim_, seed_);
  }

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Embedded view of one record: task vector and one row per step.
struct EmbeddedRecord {
  std::string id;
  Vector task;
  Matrix steps;
};

/// Embeddings keyed by record id, in insertion order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Throws DimensionError on a vector of the wrong length and
  /// PreconditionError on a duplicate id or an empty step list.
  void add(EmbeddedRecord entry);

  const EmbeddedRecord* find(const std::string& id) const;
  /// Throws PreconditionError when `id` is absent.
  const EmbeddedRecord& at(const std::string& id) const;

  const std::vector<EmbeddedRecord>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  int dim_ = 0;
  std::vector<EmbeddedRecord> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One entry per record, step order preserved. Failures from the provider
/// are rethrown as errors naming the record id.
EmbeddingTable embed_dataset(const std::vector<TrajectoryRecord>& records,
                             const EmbeddingProvider& provider);

/// Checks that `table` covers every record with a matching step count and
/// returns the covering subset in record order.
EmbeddingTable align_embeddings(const std::vector<TrajectoryRecord>& records,
                                const EmbeddingTable& table);

/// Embedding JSONL: {"id", "task_vec": [..], "step_vecs": [[..], ..]} per
/// line. Dimension is taken from the first record and enforced after.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
/// Values are written at 32-bit precision.
void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingTable& table);

}  // namespace seqguard
