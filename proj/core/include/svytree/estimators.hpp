#pragma once

#include <span>
#include <vector>

namespace svytree {

/// Paired (value, design weight) view. Does not own its storage.
///
/// Construction checks the invariants every estimator relies on: equal
/// lengths, at least one element, and finite strictly positive weights.
/// All estimators below are ratio estimators, so multiplying every weight by
/// the same positive constant leaves their result unchanged.
class WeightedSlice {
 public:
  WeightedSlice(std::span<const double> values, std::span<const double> weights);

  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return values_.size(); }

  /// Sum of weights in index order; the Hajek estimate of the population count.
  double total_weight() const;

 private:
  std::span<const double> values_;
  std::span<const double> weights_;
};

enum class EdfVariant {
  right,       // share of weight with value <= t
  left_limit,  // share of weight with value <  t
};

/// Hajek (ratio) mean: sum(w*y) / sum(w).
double hajek_mean(const WeightedSlice& s);

double weighted_edf(const WeightedSlice& s, double t, EdfVariant variant = EdfVariant::right);

/// Lower weighted quantile: the smallest observed value v whose right EDF is >= q.
/// q must lie in (0, 1].
double weighted_quantile(const WeightedSlice& s, double q);

/// Hajek mean of values clamped to [-gamma, gamma]. gamma may be +infinity.
double trimmed_mean(const WeightedSlice& s, double gamma);

/// Design-weighted sum of squared deviations about the Hajek mean.
/// Exactly zero when all values are equal.
double weighted_sse(const WeightedSlice& s);

}  // namespace svytree
