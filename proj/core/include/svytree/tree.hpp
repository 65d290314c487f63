#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svytree/data.hpp"
#include "svytree/partition.hpp"

namespace svytree {

enum class GammaForm { log, power };

/// Rate functions k(n) = ceil(n^alpha) and a trimming cutoff gamma(n) that is
/// either scale * ln(1 + n) or scale * n^(alpha - epsilon - 1/2).
struct RateParams {
  double alpha = 0.6;
  double epsilon = 0.05;
  GammaForm gamma_form = GammaForm::log;
  /// Positive or +infinity (no trimming). Unset means "derive from the data"
  /// at fit time, see FitConfig.
  std::optional<double> gamma_scale;

  /// Throws std::invalid_argument when alpha is outside (1/2, 1), epsilon is
  /// outside (0, alpha - 1/2) for the power form, or the scale is not positive.
  void validate() const;

  friend bool operator==(const RateParams&, const RateParams&) = default;
};

struct RateValues {
  std::size_t k = 0;
  double gamma = 0.0;
};

/// Requires a concrete gamma_scale.
RateValues rate_values(const RateParams& rates, std::size_t n);

/// Scale used when RateParams::gamma_scale is unset: the weighted 99th
/// percentile of |y| divided by the gamma growth term at n, so that
/// gamma(n) equals that percentile at the fitted sample size.
double auto_gamma_scale(const RateParams& rates, std::span<const double> y,
                        std::span<const double> weights);

enum class SparseLeafValue {
  zero,   // leaves with <= k rows predict 0
  hajek,  // leaves with <= k rows predict their untrimmed Hajek mean
};

struct FitConfig {
  RateParams rates;
  /// Minimum relative SSE reduction (percent of the node's SSE) for an MSE split.
  double p_threshold = 5.0;
  bool use_weighted_median = true;
  SparseLeafValue sparse_leaf_value = SparseLeafValue::zero;

  void validate() const;

  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

enum class SplitKind { mse, median_fallback };

/// Arena node. Internal nodes route x[variable] <= cutpoint to `left`.
struct TreeNode {
  bool is_leaf = true;

  std::size_t variable = 0;
  double cutpoint = 0.0;
  SplitKind split_kind = SplitKind::mse;
  std::int32_t left = -1;
  std::int32_t right = -1;

  double estimate = 0.0;
  std::size_t sample_count = 0;
  double weighted_count = 0.0;
  /// sample_count > k
  bool dense = false;
  /// Leaf holds more than 2k rows but no admissible split existed.
  bool no_valid_split = false;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class TreeModel {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root; pre-order
  std::size_t d = 0;
  std::size_t n = 0;
  FitConfig config;
  /// Scale actually used for gamma (equals config.rates.gamma_scale when set).
  double gamma_scale = 1.0;
  std::size_t k = 0;
  double gamma = 0.0;
  std::vector<std::string> variable_names;

  const TreeNode& root() const { return nodes.front(); }

  /// Node index of the leaf reached by x; throws on NaN or wrong dimension.
  std::size_t leaf_index(std::span<const double> x) const;

  std::vector<std::size_t> leaf_indices() const;
  std::size_t leaf_count() const;

  /// Leaf boxes (in pre-order) with bounds derived from root-to-leaf paths,
  /// members assigned by routing the rows of `x`.
  Partition to_partition(const Matrix& x) const;

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

struct SplitCandidate {
  std::size_t variable = 0;
  double cutpoint = 0.0;
  /// Weighted SSE(parent) - SSE(left) - SSE(right).
  double delta = 0.0;
};

struct MedianSplit {
  std::size_t variable = 0;
  double cutpoint = 0.0;
};

/// Exhaustive search over every variable and every midpoint between
/// consecutive distinct values that leaves >= k rows per side. Ties go to the
/// smallest variable, then the smallest cutpoint.
std::optional<SplitCandidate> best_mse_split(std::span<const std::size_t> members,
                                             const ObservedDataset& data, std::size_t k);

/// Median split on the first variable in `lru_order` (least recently used
/// first) whose split leaves >= k rows per side. The cutpoint is the largest
/// observed value strictly below the (weighted, per cfg) lower median.
std::optional<MedianSplit> fallback_median_split(std::span<const std::size_t> members,
                                                 const ObservedDataset& data,
                                                 std::span<const std::size_t> lru_order,
                                                 std::size_t k, const FitConfig& cfg);

/// Trimmed Hajek mean when the leaf holds more than k rows, else the sparse rule.
double leaf_estimate(std::span<const std::size_t> members, const ObservedDataset& data,
                     std::size_t k, double gamma, const FitConfig& cfg);

/// Weight-adjusted recursive partitioning. Deterministic.
TreeModel fit_tree(const ObservedDataset& data, const FitConfig& cfg);

double predict(const TreeModel& model, std::span<const double> x);

std::vector<double> predict(const TreeModel& model, const Matrix& x);

}  // namespace svytree
