#pragma once

// Counter-based 64-bit generator. Output n of the stream with key k is
//
//   splitmix64_mix(k + n * 0x9E3779B97F4A7C15),  n = 1, 2, ...
//
// where splitmix64_mix is the SplitMix64 finalizer. Streams are derived by
// hashing a label into the key, so any language can reproduce a run from the
// seed and the labels alone.

#include <cstdint>
#include <limits>
#include <string_view>

namespace phireg {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of `s`.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return splitmix64_mix(key_ + (++counter_) * kGolden); }

  /// Independent stream keyed by mix(key ^ fnv1a64(label)).
  constexpr CounterRng split(std::string_view label) const noexcept {
    return CounterRng(splitmix64_mix(key_ ^ fnv1a64(label)));
  }
  constexpr CounterRng split(std::uint64_t index) const noexcept {
    return CounterRng(splitmix64_mix(key_ ^ splitmix64_mix(index + kGolden)));
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double prob) noexcept { return uniform() < prob; }
  /// Uniform in [0, n) by rejection, so the result is unbiased. n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do x = (*this)();
    while (x >= limit);
    return x % n;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace phireg
