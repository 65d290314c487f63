#include "svytree/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "svytree/csv.hpp"
#include "svytree/rng.hpp"

namespace svytree {

namespace {

void check_sizes(std::span<const double> z, std::size_t n) {
  if (z.empty()) throw std::invalid_argument("PPS design: empty frame");
  if (n == 0) throw std::invalid_argument("PPS design: sample size must be >= 1");
  if (n > z.size()) {
    throw std::invalid_argument("PPS design: sample size " + std::to_string(n) +
                                " exceeds population size " + std::to_string(z.size()));
  }
  for (double v : z) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw std::invalid_argument("PPS design: size measures must be finite and > 0");
    }
  }
}

}  // namespace

void PpsDesign::validate() const { check_sizes(size_measures, n); }

std::vector<double> pps_inclusion_probs(std::span<const double> z, std::size_t n) {
  check_sizes(z, n);
  const std::size_t N = z.size();
  std::vector<double> pi(N, 1.0);
  if (n == N) return pi;

  std::vector<bool> certain(N, false);
  double remaining = static_cast<double>(n);
  for (;;) {
    double free_total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (!certain[i]) free_total += z[i];
    }
    std::size_t capped = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (certain[i]) continue;
      pi[i] = remaining * z[i] / free_total;
      if (pi[i] > 1.0) {
        certain[i] = true;
        pi[i] = 1.0;
        ++capped;
      }
    }
    if (capped == 0) break;
    remaining -= static_cast<double>(capped);
  }
  return pi;
}

DrawnSample draw_pps_sample(const PpsDesign& design, std::uint64_t seed) {
  design.validate();
  return draw_pps_sample(pps_inclusion_probs(design.size_measures, design.n), seed);
}

DrawnSample draw_pps_sample(std::span<const double> inclusion_probs, std::uint64_t seed) {
  double sum = 0.0;
  for (double p : inclusion_probs) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("draw_pps_sample: pi must lie in (0, 1]");
    sum += p;
  }
  const auto n = static_cast<std::size_t>(std::llround(sum));
  if (std::abs(sum - static_cast<double>(n)) > 1e-6) {
    throw std::invalid_argument("draw_pps_sample: inclusion probabilities must sum to an integer");
  }

  std::vector<std::size_t> chosen;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < inclusion_probs.size(); ++i) {
    (inclusion_probs[i] >= 1.0 ? chosen : rest).push_back(i);
  }

  Engine eng(seed);
  for (std::size_t i = rest.size(); i > 1; --i) {
    std::swap(rest[i - 1], rest[uniform_below(eng, i)]);
  }

  const std::size_t wanted = n - chosen.size();
  double rest_total = 0.0;
  for (std::size_t i : rest) rest_total += inclusion_probs[i];
  // Rescale so the cumulative total is exactly `wanted` despite rounding.
  const double factor = rest_total > 0.0 ? static_cast<double>(wanted) / rest_total : 0.0;

  std::vector<bool> taken(rest.size(), false);
  std::size_t got = 0;
  double mark = uniform01(eng);
  double cumulative = 0.0;
  for (std::size_t j = 0; j < rest.size() && got < wanted; ++j) {
    cumulative += inclusion_probs[rest[j]] * factor;
    if (mark < cumulative) {
      taken[j] = true;
      ++got;
      mark += 1.0;
    }
  }
  for (std::size_t j = rest.size(); got < wanted && j-- > 0;) {
    if (!taken[j]) {
      taken[j] = true;
      ++got;
    }
  }
  for (std::size_t j = 0; j < rest.size(); ++j) {
    if (taken[j]) chosen.push_back(rest[j]);
  }
  std::sort(chosen.begin(), chosen.end());

  DrawnSample out;
  out.indices = std::move(chosen);
  out.inclusion_probs.reserve(out.indices.size());
  out.weights.reserve(out.indices.size());
  for (std::size_t i : out.indices) {
    out.inclusion_probs.push_back(inclusion_probs[i]);
    out.weights.push_back(1.0 / inclusion_probs[i]);
  }
  return out;
}

ObservedDataset take_sample(const FinitePopulation& pop, const DrawnSample& sample) {
  ObservedDataset data;
  data.variable_names = pop.variable_names;
  data.x = Matrix(0, pop.dim());
  for (std::size_t j = 0; j < sample.indices.size(); ++j) {
    const std::size_t i = sample.indices[j];
    data.y.push_back(pop.y[i]);
    data.x.append_row(pop.x.row(i));
    data.weight.push_back(sample.weights[j]);
    data.origin.push_back(i);
  }
  return data;
}

DesignSummary design_summary(const FinitePopulation& pop, std::span<const double> pi) {
  if (pi.size() != pop.size()) throw std::invalid_argument("design_summary: length mismatch");
  if (pi.empty()) throw std::invalid_argument("design_summary: empty population");
  const double N = static_cast<double>(pi.size());

  DesignSummary s;
  double sum_pi = 0.0;
  double sum_y = 0.0;
  double sum_y2 = 0.0;
  s.min_pi = pi[0];
  s.max_pi = pi[0];
  for (std::size_t i = 0; i < pi.size(); ++i) {
    sum_pi += pi[i];
    sum_y += pop.y[i];
    sum_y2 += pop.y[i] * pop.y[i];
    s.min_pi = std::min(s.min_pi, pi[i]);
    s.max_pi = std::max(s.max_pi, pi[i]);
    if (pi[i] >= 1.0) ++s.certainty_count;
  }
  s.n = static_cast<std::size_t>(std::llround(sum_pi));
  const double mean_pi = sum_pi / N;
  const double mean_y = sum_y / N;
  double var_pi = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double dp = pi[i] - mean_pi;
    const double dy = pop.y[i] - mean_y;
    var_pi += dp * dp;
    var_y += dy * dy;
    cov += dp * dy;
  }
  var_pi /= N;
  var_y /= N;
  cov /= N;
  s.cv_pi = std::sqrt(var_pi) / mean_pi;
  s.cor_y_pi = (var_pi > 0.0 && var_y > 0.0) ? std::clamp(cov / std::sqrt(var_pi * var_y), -1.0, 1.0) : 0.0;
  s.sampling_fraction = static_cast<double>(s.n) / N;
  s.pop_second_moment = sum_y2 / N;
  return s;
}

void write_design_summaries(std::ostream& out,
                            const std::vector<std::pair<std::string, DesignSummary>>& rows) {
  out << "design,n,certainty_units,min_pi,max_pi,cv_pi,cor_y_pi,sampling_fraction\n";
  for (const auto& [name, s] : rows) {
    out << name << ',' << s.n << ',' << s.certainty_count << ',' << csv::format_double(s.min_pi)
        << ',' << csv::format_double(s.max_pi) << ',' << csv::format_double(s.cv_pi) << ','
        << csv::format_double(s.cor_y_pi) << ',' << csv::format_double(s.sampling_fraction) << '\n';
  }
}

}  // namespace svytree
