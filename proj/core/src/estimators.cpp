#include "svytree/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace svytree {

WeightedSlice::WeightedSlice(std::span<const double> values, std::span<const double> weights)
    : values_(values), weights_(weights) {
  if (values.empty()) throw std::invalid_argument("WeightedSlice: empty input");
  if (values.size() != weights.size()) {
    throw std::invalid_argument("WeightedSlice: values and weights differ in length");
  }
  for (double w : weights) {
    if (!(std::isfinite(w) && w > 0.0)) {
      throw std::invalid_argument("WeightedSlice: weights must be finite and > 0");
    }
  }
}

double WeightedSlice::total_weight() const {
  double total = 0.0;
  for (double w : weights_) total += w;
  return total;
}

double hajek_mean(const WeightedSlice& s) {
  double num = 0.0;
  double den = 0.0;
  const auto y = s.values();
  const auto w = s.weights();
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += w[i] * y[i];
    den += w[i];
  }
  return num / den;
}

double weighted_edf(const WeightedSlice& s, double t, EdfVariant variant) {
  double below = 0.0;
  double total = 0.0;
  const auto y = s.values();
  const auto w = s.weights();
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += w[i];
    const bool hit = variant == EdfVariant::right ? y[i] <= t : y[i] < t;
    if (hit) below += w[i];
  }
  return below / total;
}

double weighted_quantile(const WeightedSlice& s, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("weighted_quantile: q must be in (0, 1]");
  const auto y = s.values();
  const auto w = s.weights();
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  double total = 0.0;
  for (std::size_t i : order) total += w[i];
  // Cumulative mass within rounding of q*total counts as reaching it, so the
  // answer does not flip when all weights are rescaled.
  const double target = q * total - 1e-12 * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    cumulative += w[order[i]];
    const bool last_of_value = i + 1 == order.size() || y[order[i + 1]] != y[order[i]];
    if (last_of_value && cumulative >= target) return y[order[i]];
  }
  return y[order.back()];
}

double trimmed_mean(const WeightedSlice& s, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("trimmed_mean: gamma must be > 0");
  double num = 0.0;
  double den = 0.0;
  const auto y = s.values();
  const auto w = s.weights();
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += w[i] * std::clamp(y[i], -gamma, gamma);
    den += w[i];
  }
  return num / den;
}

double weighted_sse(const WeightedSlice& s) {
  const auto y = s.values();
  const auto w = s.weights();
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) return 0.0;
  const double mean = hajek_mean(s);
  double sse = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = y[i] - mean;
    sse += w[i] * d * d;
  }
  return sse;
}

}  // namespace svytree
