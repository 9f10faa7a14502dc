#pragma once

#include <cstdint>
#include <limits>

namespace quic::rng {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Hash of a (seed, key...) tuple, used to derive independent cell streams.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return mix64(h ^ c);
}

/// Small counter-based engine; satisfies UniformRandomBitGenerator. One
/// instance per (seed, scan index, pixel, channel) cell, so draws never
/// depend on evaluation order.
class CellStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CellStream(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in (0, 1).
  double uniform() noexcept { return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

 private:
  std::uint64_t state_;
};

/// Poisson variate with the given mean. Multiplication method below mean 10,
/// transformed rejection (PTRS) above. mean <= 0 returns 0.
std::int64_t poisson(CellStream& stream, double mean);

/// log(k!) accurate to ~1e-15 relative.
double log_factorial(std::int64_t k);

}  // namespace quic::rng
