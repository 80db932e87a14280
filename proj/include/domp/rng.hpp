#pragma once

#include <cstdint>

namespace domp {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class StreamPurpose : std::uint64_t {
  Design = 1,
  Noise = 2,
  Fusion = 3,
  Filter = 4,
};

/// Seed for the stream owned by (trial, machine, purpose). Each step feeds
/// the previous state through a bijection, so changing any coordinate with
/// the others fixed changes the result.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                                    std::uint64_t machine, StreamPurpose purpose) noexcept {
  std::uint64_t s = mix64(master + 0x9E3779B97F4A7C15ULL);
  s = mix64(s ^ trial);
  s = mix64(s ^ (machine + 0x632BE59BD9B4E019ULL));
  s = mix64(s ^ static_cast<std::uint64_t>(purpose));
  return s;
}

/// Counter-based stream: word i is mix64(seed + (i + 1) * golden). Fully
/// specified, so identical across compilers and platforms.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double next_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Standard normal variates by the Marsaglia polar method. Uses only
/// +, -, *, / and sqrt (all correctly rounded under IEEE 754) plus a
/// fixed-polynomial logarithm, so streams are bit-reproducible.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) noexcept : uniform_(seed) {}

  double next() noexcept;

 private:
  CounterStream uniform_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Natural logarithm for finite positive x from basic arithmetic only.
/// Accurate to a few ulp; exposed for testing.
double portable_log(double x) noexcept;

}  // namespace domp
