#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "svytree/estimators.hpp"
#include "svytree/rng.hpp"
#include "test_util.hpp"

using namespace svytree;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  std::vector<double> y;
  std::vector<double> w;
  WeightedSlice slice() const { return {y, w}; }
};

Sample random_sample(Engine& eng, std::size_t n, bool ties) {
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    double v = (uniform01(eng) - 0.3) * 20.0;
    if (ties) v = std::round(v);
    s.y.push_back(v);
    s.w.push_back(0.1 + 10.0 * uniform01(eng));
  }
  return s;
}

}  // namespace

TEST(WeightedSlice, RejectsBadInput) {
  std::vector<double> y{1, 2};
  std::vector<double> w1{1};
  std::vector<double> w0{1, 0};
  std::vector<double> wn{1, std::nan("")};
  std::vector<double> wi{1, kInf};
  std::vector<double> empty;
  EXPECT_THROW(WeightedSlice(y, w1), std::invalid_argument);
  EXPECT_THROW(WeightedSlice(y, w0), std::invalid_argument);
  EXPECT_THROW(WeightedSlice(y, wn), std::invalid_argument);
  EXPECT_THROW(WeightedSlice(y, wi), std::invalid_argument);
  EXPECT_THROW(WeightedSlice(empty, empty), std::invalid_argument);
}

TEST(HajekMean, Examples) {
  EXPECT_DOUBLE_EQ(hajek_mean(Sample{{2, 4, 6}, {1, 1, 1}}.slice()), 4.0);
  EXPECT_DOUBLE_EQ(hajek_mean(Sample{{2, 4}, {1, 3}}.slice()), (2.0 * 1 + 4.0 * 3) / 4.0);
  EXPECT_DOUBLE_EQ(hajek_mean(Sample{{5}, {0.2}}.slice()), 5.0);
}

TEST(WeightedEdf, Examples) {
  const Sample s{{1, 2, 3}, {1, 1, 2}};
  EXPECT_DOUBLE_EQ(weighted_edf(s.slice(), 2, EdfVariant::right), (1.0 + 1.0) / 4.0);
  EXPECT_DOUBLE_EQ(weighted_edf(s.slice(), 2, EdfVariant::left_limit), 1.0 / 4.0);
  EXPECT_EQ(weighted_edf(s.slice(), 0.5, EdfVariant::right), 0.0);
  EXPECT_EQ(weighted_edf(s.slice(), 0.5, EdfVariant::left_limit), 0.0);
  EXPECT_EQ(weighted_edf(s.slice(), 3, EdfVariant::right), 1.0);
}

TEST(WeightedEdf, MonotoneOrderedAndReachesOne) {
  Engine eng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_sample(eng, 1 + uniform_below(eng, 40), trial % 2 == 0);
    std::vector<double> grid(s.y);
    for (int g = 0; g < 50; ++g) grid.push_back((uniform01(eng) - 0.3) * 24.0);
    std::sort(grid.begin(), grid.end());
    double prev_r = 0.0;
    double prev_l = 0.0;
    for (double t : grid) {
      const double r = weighted_edf(s.slice(), t, EdfVariant::right);
      const double l = weighted_edf(s.slice(), t, EdfVariant::left_limit);
      EXPECT_GE(r, prev_r);
      EXPECT_GE(l, prev_l);
      EXPECT_GE(r, l);
      EXPECT_GE(l, 0.0);
      EXPECT_LE(r, 1.0);
      // Right-continuity at observed values: F(t) equals F just above t.
      EXPECT_EQ(r, weighted_edf(s.slice(), std::nextafter(t, kInf), EdfVariant::right));
      prev_r = r;
      prev_l = l;
    }
    EXPECT_EQ(weighted_edf(s.slice(), *std::max_element(s.y.begin(), s.y.end()), EdfVariant::right), 1.0);
  }
}

TEST(WeightedQuantile, Examples) {
  EXPECT_EQ(weighted_quantile(Sample{{1, 2, 3}, {1, 1, 1}}.slice(), 0.5), 2.0);
  EXPECT_EQ(weighted_quantile(Sample{{1, 10}, {3, 1}}.slice(), 0.5), 1.0);
  EXPECT_EQ(weighted_quantile(Sample{{4, -1, 7, 2}, {1, 2, 0.5, 3}}.slice(), 1.0), 7.0);
  EXPECT_THROW(weighted_quantile(Sample{{1}, {1}}.slice(), 0.0), std::invalid_argument);
  EXPECT_THROW(weighted_quantile(Sample{{1}, {1}}.slice(), 1.5), std::invalid_argument);
}

TEST(WeightedQuantile, MatchesBruteForceDefinition) {
  Engine eng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_sample(eng, 1 + uniform_below(eng, 30), trial % 3 == 0);
    const double q = 0.01 + 0.99 * uniform01(eng);
    double expected = kInf;
    for (double v : s.y) {
      if (weighted_edf(s.slice(), v, EdfVariant::right) >= q) expected = std::min(expected, v);
    }
    EXPECT_EQ(weighted_quantile(s.slice(), q), expected);
  }
}

TEST(TrimmedMean, Examples) {
  EXPECT_DOUBLE_EQ(trimmed_mean(Sample{{1, 2, 10}, {1, 1, 1}}.slice(), 5.0), 8.0 / 3.0);
  const Sample s{{1, -3, 2}, {2, 1, 4}};
  EXPECT_DOUBLE_EQ(trimmed_mean(s.slice(), 3.0), hajek_mean(s.slice()));
  EXPECT_EQ(trimmed_mean(s.slice(), kInf), hajek_mean(s.slice()));
  EXPECT_EQ(trimmed_mean(Sample{{-4, 4}, {1, 1}}.slice(), 2.0), 0.0);
  EXPECT_THROW(trimmed_mean(s.slice(), 0.0), std::invalid_argument);
  EXPECT_THROW(trimmed_mean(s.slice(), -1.0), std::invalid_argument);
}

TEST(TrimmedMean, MatchesClampOracleAndQuadrature) {
  Engine eng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_sample(eng, 1 + uniform_below(eng, 50), trial % 4 == 0);
    const double gamma = 0.05 + 15.0 * uniform01(eng);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      num += s.w[i] * std::clamp(s.y[i], -gamma, gamma);
      den += s.w[i];
    }
    const double got = trimmed_mean(s.slice(), gamma);
    EXPECT_NEAR(got, num / den, 1e-9);
    EXPECT_NEAR(got, fixtures::trimmed_mean_by_quadrature(s.y, s.w, gamma), 1e-9);
    EXPECT_LE(std::abs(got), gamma);
  }
}

TEST(WeightedSse, Examples) {
  EXPECT_EQ(weighted_sse(Sample{{1, 1, 1}, {0.3, 7, 2}}.slice()), 0.0);
  EXPECT_DOUBLE_EQ(weighted_sse(Sample{{0, 2}, {1, 1}}.slice()), 2.0);
  EXPECT_DOUBLE_EQ(weighted_sse(Sample{{0, 3}, {2, 1}}.slice()), 6.0);
  EXPECT_EQ(weighted_sse(Sample{{0.1, 0.1}, {1.0 / 3.0, 0.7}}.slice()), 0.0);
}

TEST(WeightedSse, AnovaDecompositionOverRandomSplits) {
  Engine eng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_sample(eng, 2 + uniform_below(eng, 40), trial % 2 == 0);
    const std::size_t cut = 1 + uniform_below(eng, s.y.size() - 1);
    const WeightedSlice left(std::span(s.y).first(cut), std::span(s.w).first(cut));
    const WeightedSlice right(std::span(s.y).subspan(cut), std::span(s.w).subspan(cut));
    const double parent = weighted_sse(s.slice());
    const double children = weighted_sse(left) + weighted_sse(right);
    EXPECT_GE(parent - children, -1e-9 * std::max(1.0, parent));
  }
}

TEST(Estimators, InvariantUnderWeightScaling) {
  Engine eng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_sample(eng, 1 + uniform_below(eng, 30), trial % 2 == 0);
    for (double c : {0.1, 7.3, 1000.0}) {
      Sample scaled = s;
      for (double& w : scaled.w) w *= c;
      EXPECT_NEAR(hajek_mean(scaled.slice()), hajek_mean(s.slice()), 1e-9);
      EXPECT_NEAR(trimmed_mean(scaled.slice(), 4.0), trimmed_mean(s.slice(), 4.0), 1e-9);
      EXPECT_EQ(weighted_quantile(scaled.slice(), 0.5), weighted_quantile(s.slice(), 0.5));
      EXPECT_NEAR(weighted_sse(scaled.slice()) / c, weighted_sse(s.slice()),
                  1e-9 * std::max(1.0, weighted_sse(s.slice())));
    }
  }
}
