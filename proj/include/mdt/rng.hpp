#pragma once

// Counter-based splittable random stream. Draw k of a stream is a pure
// function of (key, k), so workers can sample disjoint index ranges and
// reproduce the single-threaded sequence exactly.

#include <cstdint>

namespace mdt {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterStream {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  constexpr CounterStream() = default;
  constexpr explicit CounterStream(std::uint64_t seed) : key_(mix64(seed)) {}

  /// Independent child stream identified by `tag`.
  constexpr CounterStream child(std::uint64_t tag) const {
    CounterStream s;
    s.key_ = mix64(key_ ^ mix64(tag * kGolden + 0x632BE59BD9B4E019ULL));
    return s;
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * kGolden);
  }

  /// Uniform on (0, 1], 53-bit resolution, from bits 11..63.
  static constexpr double unit_open_closed(std::uint64_t b) {
    return static_cast<double>((b >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  static constexpr double unit_closed_open(std::uint64_t b) {
    return static_cast<double>(b >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
};

}  // namespace mdt
