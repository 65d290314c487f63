#include "svytree/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace svytree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Weighted marginal EDF of one column, evaluated on realized support points.
class MarginalEdf {
 public:
  MarginalEdf(const Matrix& x, std::span<const double> w, std::size_t l) {
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, l) < x(b, l); });
    double cumulative = 0.0;
    for (std::size_t i : order) {
      const double v = x(i, l);
      if (support_.empty() || support_.back() != v) {
        support_.push_back(v);
        below_.push_back(cumulative);
        through_.push_back(0.0);
      }
      cumulative += w[i];
      through_.back() = cumulative;
    }
    total_ = cumulative;
  }

  // Index of the largest support point <= bound (0 when bound is below all data).
  std::size_t realize(double bound) const {
    if (bound == -kInf) return 0;
    if (bound == kInf) return support_.size() - 1;
    auto it = std::upper_bound(support_.begin(), support_.end(), bound);
    if (it == support_.begin()) return 0;
    return static_cast<std::size_t>(it - support_.begin()) - 1;
  }

  double at(std::size_t idx, EdfVariant variant) const {
    return (variant == EdfVariant::right ? through_[idx] : below_[idx]) / total_;
  }

 private:
  std::vector<double> support_;
  std::vector<double> below_;    // weight strictly below support_[i]
  std::vector<double> through_;  // weight at or below support_[i]
  double total_ = 0.0;
};

}  // namespace

bool Box::contains(std::span<const double> x) const {
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (!(lower[l] < x[l] && x[l] <= upper[l])) return false;
  }
  return true;
}

Partition::Partition(std::size_t dim, std::vector<Box> boxes) : dim_(dim), boxes_(std::move(boxes)) {
  if (dim_ == 0) throw std::invalid_argument("Partition: dimension must be >= 1");
  if (boxes_.empty()) throw std::invalid_argument("Partition: at least one box required");
  for (const auto& b : boxes_) {
    if (b.lower.size() != dim_ || b.upper.size() != dim_) {
      throw std::invalid_argument("Partition: box bound length differs from dimension");
    }
    for (std::size_t l = 0; l < dim_; ++l) {
      if (!(b.lower[l] <= b.upper[l])) throw std::invalid_argument("Partition: lower > upper");
    }
  }
  std::vector<std::size_t> all;
  for (const auto& b : boxes_) all.insert(all.end(), b.members.begin(), b.members.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("Partition: a row belongs to more than one box");
  }
}

Partition Partition::whole_space(std::size_t dim, std::size_t rows) {
  Box box{std::vector<double>(dim, -kInf), std::vector<double>(dim, kInf), {}};
  box.members.resize(rows);
  std::iota(box.members.begin(), box.members.end(), std::size_t{0});
  return Partition(dim, {std::move(box)});
}

Partition Partition::route(std::size_t dim, std::vector<Box> boxes, const Matrix& x) {
  for (auto& b : boxes) b.members.clear();
  Partition p(dim, std::move(boxes));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    p.boxes_[p.box_containing(x.row(i))].members.push_back(i);
  }
  return p;
}

std::size_t Partition::box_containing(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("box_containing: dimension mismatch");
  for (double v : x) {
    if (std::isnan(v)) throw std::invalid_argument("box_containing: NaN coordinate");
  }
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].contains(x)) return i;
  }
  throw std::invalid_argument("box_containing: point not covered by the partition");
}

double partition_norm(const Partition& p, const Matrix& x, std::span<const double> weights,
                      std::size_t l, EdfVariant variant) {
  if (l >= p.dim() || l >= x.cols()) throw std::invalid_argument("partition_norm: invalid dimension");
  if (x.rows() == 0) throw std::invalid_argument("partition_norm: empty data");
  if (weights.size() != x.rows()) throw std::invalid_argument("partition_norm: weight count mismatch");

  // Rescale by the largest weight: constant weights become exactly 1.
  const double scale = *std::max_element(weights.begin(), weights.end());
  std::vector<double> w(weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = weights[i] / scale;

  const MarginalEdf edf(x, w, l);
  double total = 0.0;
  for (double wi : w) total += wi;

  double norm = 0.0;
  for (const auto& box : p.boxes()) {
    double mass = 0.0;
    for (std::size_t i : box.members) mass += w[i];
    if (mass == 0.0) continue;
    const double width =
        edf.at(edf.realize(box.upper[l]), variant) - edf.at(edf.realize(box.lower[l]), variant);
    norm += width * (mass / total);
  }
  return std::clamp(norm, 0.0, 1.0);
}

double partition_norm(const Partition& p, const ObservedDataset& data, std::size_t l,
                      EdfVariant variant) {
  return partition_norm(p, data.x, data.weight, l, variant);
}

double partition_norm(const Partition& p, const FinitePopulation& pop, std::size_t l,
                      EdfVariant variant) {
  const std::vector<double> unit(pop.size(), 1.0);
  return partition_norm(p, pop.x, unit, l, variant);
}

}  // namespace svytree
