#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "svytree/design.hpp"
#include "svytree/rng.hpp"

using namespace svytree;

namespace {

std::vector<double> random_sizes(Engine& eng, std::size_t n) {
  std::vector<double> z(n);
  for (double& v : z) v = std::exp(4.0 * uniform01(eng));
  return z;
}

FinitePopulation population_from(const std::vector<double>& y, const std::vector<double>& z) {
  FinitePopulation pop;
  pop.y = y;
  pop.z = z;
  pop.x = Matrix(y.size(), 1);
  pop.ids.resize(y.size());
  std::iota(pop.ids.begin(), pop.ids.end(), std::size_t{0});
  return pop;
}

}  // namespace

TEST(InclusionProbs, Examples) {
  EXPECT_EQ(pps_inclusion_probs(std::vector<double>{2, 2, 2, 2}, 2), (std::vector<double>{0.5, 0.5, 0.5, 0.5}));
  const auto pi = pps_inclusion_probs(std::vector<double>{1, 1, 1, 10}, 2);
  EXPECT_DOUBLE_EQ(pi[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pi[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pi[2], 1.0 / 3.0);
  EXPECT_EQ(pi[3], 1.0);
  EXPECT_EQ(pps_inclusion_probs(std::vector<double>{1, 5, 9}, 3), (std::vector<double>{1, 1, 1}));
}

TEST(InclusionProbs, Errors) {
  EXPECT_THROW(pps_inclusion_probs(std::vector<double>{1, 2}, 3), std::invalid_argument);
  EXPECT_THROW(pps_inclusion_probs(std::vector<double>{1, 0}, 1), std::invalid_argument);
  EXPECT_THROW(pps_inclusion_probs(std::vector<double>{1, -1}, 1), std::invalid_argument);
  EXPECT_THROW(pps_inclusion_probs(std::vector<double>{1, 2}, 0), std::invalid_argument);
}

TEST(InclusionProbs, SumRangeAndMonotonicity) {
  Engine eng(51);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t N = 1 + uniform_below(eng, 300);
    const std::size_t n = 1 + uniform_below(eng, N);
    auto z = random_sizes(eng, N);
    if (trial % 5 == 0) z[0] = 1e6;  // forces certainty units
    const auto pi = pps_inclusion_probs(z, n);
    EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), static_cast<double>(n), 1e-9);
    for (std::size_t i = 0; i < N; ++i) {
      EXPECT_GT(pi[i], 0.0);
      EXPECT_LE(pi[i], 1.0);
      for (std::size_t j = 0; j < N; j += 7) {
        if (z[i] >= z[j]) EXPECT_GE(pi[i], pi[j]);
      }
    }
  }
}

TEST(DrawPps, CensusAndDeterminism) {
  const PpsDesign census{{1, 2, 3, 4}, 4};
  const auto all = draw_pps_sample(census, 9);
  EXPECT_EQ(all.indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(all.weights, (std::vector<double>{1, 1, 1, 1}));

  Engine eng(52);
  const PpsDesign design{random_sizes(eng, 500), 60};
  const auto a = draw_pps_sample(design, 1234);
  const auto b = draw_pps_sample(design, 1234);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_NE(a.indices, draw_pps_sample(design, 1235).indices);
}

TEST(DrawPps, SampleInvariants) {
  Engine eng(53);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t N = 2 + uniform_below(eng, 200);
    const std::size_t n = 1 + uniform_below(eng, N);
    auto z = random_sizes(eng, N);
    if (trial % 4 == 0) z[N / 2] = 1e5;
    const PpsDesign design{z, n};
    const auto s = draw_pps_sample(design, static_cast<std::uint64_t>(trial));
    const auto pi = pps_inclusion_probs(z, n);
    ASSERT_EQ(s.indices.size(), n);
    EXPECT_TRUE(std::is_sorted(s.indices.begin(), s.indices.end()));
    EXPECT_EQ(std::set<std::size_t>(s.indices.begin(), s.indices.end()).size(), n);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(s.inclusion_probs[j], pi[s.indices[j]]);
      EXPECT_EQ(s.weights[j], 1.0 / pi[s.indices[j]]);
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (pi[i] >= 1.0) EXPECT_TRUE(std::binary_search(s.indices.begin(), s.indices.end(), i));
    }
  }
}

TEST(DrawPps, InclusionFrequenciesMatchProbabilities) {
  const PpsDesign design{{1, 1, 1, 10}, 2};
  const std::vector<double> expected{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0};
  const int draws = 100000;
  std::vector<int> hits(4, 0);
  for (int r = 0; r < draws; ++r) {
    for (auto i : draw_pps_sample(design, derive_seed(7, {static_cast<std::uint64_t>(r)})).indices) ++hits[i];
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double f = static_cast<double>(hits[i]) / draws;
    const double se = std::sqrt(expected[i] * (1 - expected[i]) / draws);
    EXPECT_LE(std::abs(f - expected[i]), 3 * se + 1e-12) << "unit " << i;
  }
}

TEST(DrawPps, InclusionFrequenciesOnUnequalDesign) {
  const std::vector<double> z{1, 2, 3, 4, 5, 6, 7, 30};
  const PpsDesign design{z, 3};
  const auto pi = pps_inclusion_probs(z, 3);
  const int draws = 40000;
  std::vector<int> hits(z.size(), 0);
  for (int r = 0; r < draws; ++r) {
    for (auto i : draw_pps_sample(design, derive_seed(8, {static_cast<std::uint64_t>(r)})).indices) ++hits[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = static_cast<double>(hits[i]) / draws;
    const double se = std::sqrt(pi[i] * (1 - pi[i]) / draws);
    EXPECT_LE(std::abs(f - pi[i]), 4 * se + 1e-12) << "unit " << i;
  }
}

TEST(DrawPps, HorvitzThompsonCountIsUnbiased) {
  const std::vector<double> z{1, 1.5, 2, 3, 5, 8, 13, 21, 34, 2.5, 4, 6};
  const PpsDesign design{z, 4};
  const int reps = 10000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto s = draw_pps_sample(design, derive_seed(99, {static_cast<std::uint64_t>(r)}));
    const double est = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / reps;
  const double var = (sum_sq - reps * mean * mean) / (reps - 1);
  EXPECT_LE(std::abs(mean - static_cast<double>(z.size())), 3 * std::sqrt(var / reps));
}

TEST(DrawPps, AcceptsPrecomputedProbabilities) {
  const std::vector<double> pi{0.5, 0.5, 1.0};
  const auto s = draw_pps_sample(pi, 3);
  EXPECT_EQ(s.indices.size(), 2u);
  EXPECT_TRUE(std::binary_search(s.indices.begin(), s.indices.end(), 2u));
  const std::vector<double> fractional{0.5, 0.7};
  EXPECT_THROW(draw_pps_sample(fractional, 3), std::invalid_argument);
}

TEST(TakeSample, CopiesRowsAndSetsWeights) {
  auto pop = population_from({10, 20, 30, 40}, {1, 1, 1, 10});
  for (std::size_t i = 0; i < 4; ++i) pop.x(i, 0) = static_cast<double>(i);
  const auto s = draw_pps_sample(PpsDesign{pop.z, 2}, 5);
  const auto obs = take_sample(pop, s);
  ASSERT_EQ(obs.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(obs.origin[j], s.indices[j]);
    EXPECT_EQ(obs.y[j], pop.y[s.indices[j]]);
    EXPECT_EQ(obs.x(j, 0), pop.x(s.indices[j], 0));
    EXPECT_EQ(obs.weight[j], s.weights[j]);
  }
}

TEST(DesignSummary, Examples) {
  const auto pop = population_from({1, 2, 3, 4}, {1, 2, 3, 4});
  const std::vector<double> pi{0.2, 0.4, 0.6, 0.8};
  const auto s = design_summary(pop, pi);
  const double mean = 0.5;
  const double sd = std::sqrt((0.09 + 0.01 + 0.01 + 0.09) / 4.0);
  EXPECT_NEAR(s.cv_pi, sd / mean, 1e-12);
  EXPECT_NEAR(s.cv_pi, 0.4472, 1e-4);
  EXPECT_EQ(s.n, 2u);
  EXPECT_EQ(s.min_pi, 0.2);
  EXPECT_EQ(s.max_pi, 0.8);
  EXPECT_NEAR(s.cor_y_pi, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.sampling_fraction, 0.5);
  EXPECT_DOUBLE_EQ(s.pop_second_moment, 30.0 / 4.0);

  const auto equal = design_summary(pop, pps_inclusion_probs(std::vector<double>{1, 1, 1, 1}, 2));
  EXPECT_EQ(equal.cv_pi, 0.0);
  EXPECT_EQ(equal.certainty_count, 0u);
  EXPECT_EQ(equal.cor_y_pi, 0.0);

  const auto capped = design_summary(pop, pps_inclusion_probs(std::vector<double>{1, 1, 1, 10}, 2));
  EXPECT_EQ(capped.certainty_count, 1u);
  EXPECT_THROW(design_summary(pop, std::vector<double>{0.5}), std::invalid_argument);
}

TEST(DesignSummary, IndependentSizesGiveNearZeroCorrelation) {
  Engine eng(54);
  std::vector<double> y(10000);
  std::vector<double> z(10000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = uniform01(eng);
    z[i] = 0.5 + uniform01(eng);
  }
  const auto pop = population_from(y, z);
  const auto s = design_summary(pop, pps_inclusion_probs(z, 500));
  EXPECT_LT(std::abs(s.cor_y_pi), 0.05);
  EXPECT_GE(s.cv_pi, 0.0);
  EXPECT_LE(s.min_pi, s.max_pi);
}

TEST(DesignSummary, CsvColumns) {
  const auto pop = population_from({1, 2, 3, 4}, {1, 2, 3, 4});
  std::ostringstream out;
  write_design_summaries(out, {{"pps", design_summary(pop, pps_inclusion_probs(pop.z, 2))}});
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "design,n,certainty_units,min_pi,max_pi,cv_pi,cor_y_pi,sampling_fraction");
  EXPECT_EQ(text.substr(text.find('\n') + 1, 6), "pps,2,");
}
