// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace seqguard {

/// SplitMix64 generator. All randomness in the engine flows from one of
/// these; `split` derives an independent stream per purpose so that, for
/// example, changing the batch order never perturbs weight initialization.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). `n` must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Child stream keyed by a purpose tag. Does not advance this stream.
  Rng split(std::string_view purpose) const;
  /// Child stream keyed by an index (per-record derived seeds).
  Rng split(std::uint64_t index) const;

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Stateless 64-bit mixer (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over bytes followed by `mix64`, keyed by `seed`.
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed);

}  // namespace seqguard
