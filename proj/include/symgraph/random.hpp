#pragma once

#include <cstdint>

#include "symgraph/errors.hpp"

namespace symgraph {

/// Counter-based deterministic pseudo-random stream (splitmix64 family).
/// Output depends only on (key, counter), so the same seed yields a
/// bit-identical sequence on every platform. Substreams derive a fresh key
/// from (key, index) and are safe to hand to parallel workers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept : key_(seed) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 1;
    return mix(key_ + kGamma * counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound); bound must be positive. Unbiased via rejection.
  std::int64_t next_below(std::int64_t bound) {
    if (bound <= 0) throw invalid_input("RandomStream::next_below: bound must be positive");
    const std::uint64_t b = static_cast<std::uint64_t>(bound);
    const std::uint64_t threshold = (0 - b) % b;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return static_cast<std::int64_t>(r % b);
    }
  }

  /// Independent stream keyed by (this stream's seed, index); position-free.
  RandomStream substream(std::uint64_t index) const noexcept {
    return RandomStream(mix(key_ ^ mix(index + kGamma)));
  }

  std::uint64_t seed() const noexcept { return key_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace symgraph
