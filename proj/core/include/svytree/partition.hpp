#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svytree/data.hpp"
#include "svytree/estimators.hpp"

namespace svytree {

/// Axis-aligned box lower < x <= upper per dimension. Infinite bounds mark
/// unbounded sides. `members` are row indices of the data the box was built on.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> members;

  bool contains(std::span<const double> x) const;
};

/// Disjoint boxes covering the predictor space (and every data row).
class Partition {
 public:
  Partition(std::size_t dim, std::vector<Box> boxes);

  /// The single unbounded box holding every row 0..rows-1.
  static Partition whole_space(std::size_t dim, std::size_t rows);

  /// Rebuilds member lists by routing every row of `x` to its box.
  static Partition route(std::size_t dim, std::vector<Box> boxes, const Matrix& x);

  std::size_t dim() const { return dim_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  std::size_t size() const { return boxes_.size(); }

  /// Index of the box containing x; throws on NaN coordinates or if no box covers x.
  std::size_t box_containing(std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::vector<Box> boxes_;
};

/// Sum over boxes of [F_l(b_l) - F_l(a_l)] * P(B), F_l being the weighted
/// marginal EDF of column l (in the chosen variant) and P(B) the weighted
/// share of rows in B. Bounds are evaluated at realized data values: a finite
/// bound snaps to the largest observed value <= it, an unbounded lower side
/// to the observed minimum and an unbounded upper side to the observed maximum.
/// `l` is 0-based.
double partition_norm(const Partition& p, const Matrix& x, std::span<const double> weights,
                      std::size_t l, EdfVariant variant);

double partition_norm(const Partition& p, const ObservedDataset& data, std::size_t l,
                      EdfVariant variant);

/// Unit weights.
double partition_norm(const Partition& p, const FinitePopulation& pop, std::size_t l,
                      EdfVariant variant);

}  // namespace svytree
