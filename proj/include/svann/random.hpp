// Deterministic randomness for reproducible experiments.
//
// Every random choice in the library flows from a SplitMix64 stream. Stage
// streams are derived from one root seed plus a textual tag, so re-running
// any pipeline stage with the same config reproduces it byte for byte.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace svann {

/// SplitMix64 generator (Steele, Lea & Flood). 64 bits of state, passes
/// BigCrush, and cheap enough to seed one stream per pipeline stage.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, bound) via Lemire's multiply-shift reduction.
  /// Slight modulo bias is below 2^-64 per draw; fine for shuffling and
  /// sampling, and fully deterministic across platforms.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Derive a per-stage seed from a root seed and a stage tag (FNV-1a over the
/// tag, mixed through one SplitMix64 step). Different tags give independent
/// streams; the same (root, tag) pair always gives the same stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return SplitMix64(root ^ h).next();
}

/// In-place Fisher-Yates shuffle driven by SplitMix64.
template <class T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace svann
