#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "quic/rng.hpp"

using namespace quic::rng;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments sample_moments(double mean, int n, std::uint64_t key) {
  CellStream s(key);
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(poisson(s, mean));
    sum += k;
    sum2 += k * k;
  }
  const double m = sum / n;
  return {m, (sum2 - n * m * m) / (n - 1)};
}

// Pearson chi-square against the exact pmf, pooling sparse tails.
double chi_square(double mean, int n, std::uint64_t key, int* dof) {
  CellStream s(key);
  std::map<std::int64_t, int> hist;
  for (int i = 0; i < n; ++i) ++hist[poisson(s, mean)];
  const auto lo = static_cast<std::int64_t>(std::max(0.0, std::floor(mean - 5.0 * std::sqrt(mean))));
  const auto hi = static_cast<std::int64_t>(std::ceil(mean + 5.0 * std::sqrt(mean)));
  double stat = 0.0;
  double covered = 0.0;
  int observed_inside = 0;
  int bins = 0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double p = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
    covered += p;
    const double expected = p * n;
    const int observed = hist.count(k) ? hist[k] : 0;
    observed_inside += observed;
    stat += (observed - expected) * (observed - expected) / expected;
    ++bins;
  }
  const double tail_expected = (1.0 - covered) * n;
  const int tail_observed = n - observed_inside;
  if (tail_expected > 5.0) {
    stat += (tail_observed - tail_expected) * (tail_observed - tail_expected) / tail_expected;
    ++bins;
  }
  *dof = bins - 1;
  return stat;
}

}  // namespace

TEST(Poisson, ZeroMeanAlwaysZero) {
  CellStream s(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(poisson(s, 0.0), 0);
  EXPECT_EQ(poisson(s, -3.0), 0);
}

TEST(Poisson, MeanOfHundred) {
  const auto m = sample_moments(100.0, 100000, 42);
  EXPECT_NEAR(m.mean, 100.0, 1.0);
  EXPECT_NEAR(m.variance, 100.0, 3.0);
}

TEST(Poisson, SmallAndLargeMeanMoments) {
  for (double mean : {0.3, 4.5, 9.99, 10.0, 37.0, 1e4}) {
    const int n = 200000;
    const auto m = sample_moments(mean, n, 99);
    const double se = std::sqrt(mean / n);
    EXPECT_NEAR(m.mean, mean, 5.0 * se) << mean;
    EXPECT_NEAR(m.variance / mean, 1.0, 0.03) << mean;
  }
}

TEST(Poisson, MatchesExactPmf) {
  // 99.9th percentile of chi-square is below dof + 4.5 sqrt(2 dof) for these dof.
  for (double mean : {2.5, 15.0, 250.0}) {
    int dof = 0;
    const double stat = chi_square(mean, 100000, 1234, &dof);
    EXPECT_LT(stat, dof + 4.5 * std::sqrt(2.0 * dof)) << mean;
  }
}

TEST(CellStream, DeterministicPerKey) {
  CellStream a(stream_key(5, 1, 2, 3));
  CellStream b(stream_key(5, 1, 2, 3));
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(stream_key(5, 1, 2, 3), stream_key(5, 1, 2, 4));
  EXPECT_NE(stream_key(5, 1, 2, 3), stream_key(6, 1, 2, 3));
}

TEST(CellStream, UniformInOpenInterval) {
  CellStream s(8);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(LogFactorial, MatchesLgamma) {
  for (std::int64_t k : {0, 1, 2, 10, 127, 128, 1000, 123456}) {
    const double ref = std::lgamma(static_cast<double>(k) + 1.0);
    EXPECT_NEAR(log_factorial(k), ref, 1e-13 * std::max(1.0, ref)) << k;
  }
}
