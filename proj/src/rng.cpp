#include "quic/rng.hpp"

#include <array>
#include <cmath>

namespace quic::rng {
namespace {

constexpr int kTableSize = 256;

const std::array<double, kTableSize>& log_factorial_table() {
  static const std::array<double, kTableSize> table = [] {
    std::array<double, kTableSize> t{};
    t[0] = 0.0;
    for (int k = 1; k < kTableSize; ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
    return t;
  }();
  return table;
}

std::int64_t poisson_small(CellStream& stream, double mean) {
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double product = stream.uniform();
  while (product > limit) {
    ++k;
    product *= stream.uniform();
  }
  return k;
}

// Hormann, "The transformed rejection method for generating Poisson random
// variables", Insurance: Mathematics and Economics 12 (1993).
std::int64_t poisson_ptrs(CellStream& stream, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + static_cast<double>(k) * loglam - log_factorial(k);
    if (lhs <= rhs) return k;
  }
}

}  // namespace

double log_factorial(std::int64_t k) {
  if (k < kTableSize) return log_factorial_table()[static_cast<std::size_t>(k)];
  // Stirling series for log Gamma(n), n = k + 1.
  const double n = static_cast<double>(k) + 1.0;
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
  return (n - 0.5) * std::log(n) - n + 0.5 * std::log(2.0 * 3.14159265358979323846) + series;
}

std::int64_t poisson(CellStream& stream, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 10.0) return poisson_small(stream, mean);
  return poisson_ptrs(stream, mean);
}

}  // namespace quic::rng
