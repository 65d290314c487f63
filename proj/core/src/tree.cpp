#include "svytree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "svytree/estimators.hpp"

namespace svytree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double gamma_growth(const RateParams& rates, std::size_t n) {
  const double nn = static_cast<double>(n);
  if (rates.gamma_form == GammaForm::log) return std::log1p(nn);
  return std::pow(nn, rates.alpha - rates.epsilon - 0.5);
}

std::vector<double> gather(std::span<const double> src, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(src[r]);
  return out;
}

// Weighted running mean (West's update); exact for constant inputs.
struct RunningMean {
  double weight = 0.0;
  double mean = 0.0;

  void add(double y, double w) {
    weight += w;
    mean += (w / weight) * (y - mean);
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const ObservedDataset& original, const ObservedDataset& work, const FitConfig& cfg,
              TreeModel& model)
      : original_(original), work_(work), cfg_(cfg), model_(model) {}

  std::int32_t build(std::vector<std::size_t> members, std::vector<std::size_t> lru) {
    const auto idx = static_cast<std::int32_t>(model_.nodes.size());
    model_.nodes.emplace_back();
    {
      auto& node = model_.nodes.back();
      node.sample_count = members.size();
      double wc = 0.0;
      for (std::size_t r : members) wc += original_.weight[r];
      node.weighted_count = wc;
    }

    const std::size_t k = model_.k;
    if (members.size() <= 2 * k) {
      make_leaf(idx, members, false);
      return idx;
    }

    std::size_t variable = 0;
    double cutpoint = 0.0;
    SplitKind kind = SplitKind::mse;

    const auto best = best_mse_split(members, work_, k);
    const auto y = gather(work_.y, members);
    const auto w = gather(work_.weight, members);
    const double sse = weighted_sse(WeightedSlice(y, w));
    if (best && best->delta > 0.0 && best->delta >= (cfg_.p_threshold / 100.0) * sse) {
      variable = best->variable;
      cutpoint = best->cutpoint;
    } else if (auto fallback = fallback_median_split(members, work_, lru, k, cfg_)) {
      variable = fallback->variable;
      cutpoint = fallback->cutpoint;
      kind = SplitKind::median_fallback;
    } else {
      make_leaf(idx, members, true);
      return idx;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : members) {
      (work_.x(r, variable) <= cutpoint ? left : right).push_back(r);
    }
    members.clear();
    members.shrink_to_fit();

    auto used = std::find(lru.begin(), lru.end(), variable);
    std::rotate(used, used + 1, lru.end());

    const auto l = build(std::move(left), lru);
    const auto r = build(std::move(right), std::move(lru));

    auto& node = model_.nodes[static_cast<std::size_t>(idx)];
    node.is_leaf = false;
    node.variable = variable;
    node.cutpoint = cutpoint;
    node.split_kind = kind;
    node.left = l;
    node.right = r;
    return idx;
  }

 private:
  void make_leaf(std::int32_t idx, const std::vector<std::size_t>& members, bool exhausted) {
    auto& node = model_.nodes[static_cast<std::size_t>(idx)];
    node.is_leaf = true;
    node.estimate = leaf_estimate(members, work_, model_.k, model_.gamma, cfg_);
    node.dense = members.size() > model_.k;
    node.no_valid_split = exhausted;
  }

  const ObservedDataset& original_;
  const ObservedDataset& work_;
  const FitConfig& cfg_;
  TreeModel& model_;
};

}  // namespace

void RateParams::validate() const {
  if (!(alpha > 0.5 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (1/2, 1)");
  if (gamma_form == GammaForm::power && !(epsilon > 0.0 && epsilon < alpha - 0.5)) {
    throw std::invalid_argument("epsilon must lie in (0, alpha - 1/2)");
  }
  if (gamma_scale && !(*gamma_scale > 0.0)) {
    throw std::invalid_argument("gamma_scale must be positive or infinite");
  }
}

RateValues rate_values(const RateParams& rates, std::size_t n) {
  rates.validate();
  if (n == 0) throw std::invalid_argument("rate_values: n must be >= 1");
  if (!rates.gamma_scale) throw std::invalid_argument("rate_values: gamma_scale is unresolved");
  const double raw = std::pow(static_cast<double>(n), rates.alpha);
  // Snap values that are integral up to rounding so ceil does not overshoot.
  const double nearest = std::round(raw);
  const double k = std::abs(raw - nearest) <= 1e-9 * raw ? nearest : std::ceil(raw);
  RateValues out;
  out.k = static_cast<std::size_t>(std::max(1.0, k));
  const double scale = *rates.gamma_scale;
  out.gamma = std::isinf(scale) ? kInf : scale * gamma_growth(rates, n);
  return out;
}

double auto_gamma_scale(const RateParams& rates, std::span<const double> y,
                        std::span<const double> weights) {
  std::vector<double> magnitude(y.size());
  std::transform(y.begin(), y.end(), magnitude.begin(), [](double v) { return std::abs(v); });
  const WeightedSlice s(magnitude, weights);
  double cutoff = weighted_quantile(s, 0.99);
  if (cutoff == 0.0) cutoff = *std::max_element(magnitude.begin(), magnitude.end());
  if (cutoff == 0.0) cutoff = 1.0;  // all responses are zero; any cutoff works
  const double growth = gamma_growth(rates, y.size());
  double scale = cutoff / growth;
  while (scale * growth < cutoff) scale = std::nextafter(scale, kInf);
  return scale;
}

void FitConfig::validate() const {
  rates.validate();
  if (!(p_threshold >= 0.0 && p_threshold < 100.0)) {
    throw std::invalid_argument("p_threshold must lie in [0, 100)");
  }
}

std::size_t TreeModel::leaf_index(std::span<const double> x) const {
  if (x.size() != d) throw std::invalid_argument("predict: dimension mismatch");
  for (double v : x) {
    if (std::isnan(v)) throw std::invalid_argument("predict: NaN coordinate");
  }
  std::size_t idx = 0;
  while (!nodes[idx].is_leaf) {
    const auto& node = nodes[idx];
    idx = static_cast<std::size_t>(x[node.variable] <= node.cutpoint ? node.left : node.right);
  }
  return idx;
}

std::vector<std::size_t> TreeModel::leaf_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf) out.push_back(i);
  }
  return out;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& node) { return node.is_leaf; }));
}

Partition TreeModel::to_partition(const Matrix& x) const {
  std::vector<Box> boxes;
  struct Frame {
    std::size_t node;
    std::vector<double> lower;
    std::vector<double> upper;
  };
  std::vector<Frame> stack;
  stack.push_back({0, std::vector<double>(d, -kInf), std::vector<double>(d, kInf)});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const auto& node = nodes[f.node];
    if (node.is_leaf) {
      boxes.push_back({std::move(f.lower), std::move(f.upper), {}});
      continue;
    }
    Frame left{static_cast<std::size_t>(node.left), f.lower, f.upper};
    left.upper[node.variable] = std::min(left.upper[node.variable], node.cutpoint);
    Frame right{static_cast<std::size_t>(node.right), std::move(f.lower), std::move(f.upper)};
    right.lower[node.variable] = std::max(right.lower[node.variable], node.cutpoint);
    // push right first so leaves come out in pre-order
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return Partition::route(d, std::move(boxes), x);
}

std::optional<SplitCandidate> best_mse_split(std::span<const std::size_t> members,
                                             const ObservedDataset& data, std::size_t k) {
  const std::size_t n = members.size();
  const std::size_t min_side = std::max<std::size_t>(k, 1);
  if (n < 2 || n < 2 * min_side) return std::nullopt;

  const auto y_m = gather(data.y, members);
  const auto w_m = gather(data.weight, members);
  const double parent_sse = weighted_sse(WeightedSlice(y_m, w_m));
  const double tie_tolerance = 1e-12 * parent_sse;

  std::optional<SplitCandidate> best;
  double best_delta = -1.0;

  std::vector<std::size_t> order(n);
  std::vector<RunningMean> prefix(n);
  std::vector<RunningMean> suffix(n);
  for (std::size_t l = 0; l < data.dim(); ++l) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.x(members[a], l) < data.x(members[b], l);
    });
    RunningMean acc;
    for (std::size_t i = 0; i < n; ++i) {
      acc.add(y_m[order[i]], w_m[order[i]]);
      prefix[i] = acc;
    }
    acc = RunningMean{};
    for (std::size_t i = n; i-- > 0;) {
      acc.add(y_m[order[i]], w_m[order[i]]);
      suffix[i] = acc;
    }
    // left = order[0..i], right = order[i+1..n)
    for (std::size_t i = min_side - 1; i + min_side < n; ++i) {
      const double lo = data.x(members[order[i]], l);
      const double hi = data.x(members[order[i + 1]], l);
      if (!(lo < hi)) continue;
      const auto& left = prefix[i];
      const auto& right = suffix[i + 1];
      const double diff = left.mean - right.mean;
      const double delta = left.weight * right.weight / (left.weight + right.weight) * diff * diff;
      if (delta > best_delta + tie_tolerance) {
        double cut = std::midpoint(lo, hi);
        if (!(cut < hi)) cut = lo;
        best_delta = delta;
        best = SplitCandidate{l, cut, delta};
      }
    }
  }
  return best;
}

std::optional<MedianSplit> fallback_median_split(std::span<const std::size_t> members,
                                                 const ObservedDataset& data,
                                                 std::span<const std::size_t> lru_order,
                                                 std::size_t k, const FitConfig& cfg) {
  if (members.size() < 2) return std::nullopt;
  const std::size_t min_side = std::max<std::size_t>(k, 1);
  std::vector<double> values(members.size());
  const std::vector<double> unit(members.size(), 1.0);
  const auto weights = cfg.use_weighted_median ? gather(data.weight, members) : unit;
  for (std::size_t l : lru_order) {
    for (std::size_t i = 0; i < members.size(); ++i) values[i] = data.x(members[i], l);
    const double median = weighted_quantile(WeightedSlice(values, weights), 0.5);
    double cut = -kInf;
    for (double v : values) {
      if (v < median && v > cut) cut = v;
    }
    if (cut == -kInf) continue;
    const auto left = static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [&](double v) { return v <= cut; }));
    if (left >= min_side && members.size() - left >= min_side) return MedianSplit{l, cut};
  }
  return std::nullopt;
}

double leaf_estimate(std::span<const std::size_t> members, const ObservedDataset& data,
                     std::size_t k, double gamma, const FitConfig& cfg) {
  if (members.empty()) throw std::invalid_argument("leaf_estimate: empty leaf");
  const auto y = gather(data.y, members);
  const auto w = gather(data.weight, members);
  const WeightedSlice s(y, w);
  if (members.size() > k) return trimmed_mean(s, gamma);
  return cfg.sparse_leaf_value == SparseLeafValue::zero ? 0.0 : hajek_mean(s);
}

TreeModel fit_tree(const ObservedDataset& data, const FitConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("fit_tree: empty data");
  if (const auto report = validate_dataset(data); !report.empty()) {
    throw std::invalid_argument("fit_tree: invalid data\n" + to_string(report));
  }

  TreeModel model;
  model.d = data.dim();
  model.n = data.size();
  model.config = cfg;
  model.variable_names = data.variable_names;
  if (model.variable_names.empty()) {
    for (std::size_t l = 0; l < model.d; ++l) model.variable_names.push_back("x" + std::to_string(l + 1));
  }

  // Ratio estimators and argmax split search do not depend on the weight
  // scale; dividing by the largest weight makes constant weights exactly 1.
  ObservedDataset work = data;
  const double max_w = *std::max_element(data.weight.begin(), data.weight.end());
  for (double& w : work.weight) w /= max_w;

  RateParams rates = cfg.rates;
  if (!rates.gamma_scale) rates.gamma_scale = auto_gamma_scale(rates, work.y, work.weight);
  const auto rv = rate_values(rates, model.n);
  model.gamma_scale = *rates.gamma_scale;
  model.k = rv.k;
  model.gamma = rv.gamma;

  std::vector<std::size_t> all(model.n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> lru(model.d);
  std::iota(lru.begin(), lru.end(), std::size_t{0});

  TreeBuilder builder(data, work, cfg, model);
  builder.build(std::move(all), std::move(lru));
  return model;
}

double predict(const TreeModel& model, std::span<const double> x) {
  return model.nodes[model.leaf_index(x)].estimate;
}

std::vector<double> predict(const TreeModel& model, const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(model, x.row(i));
  return out;
}

}  // namespace svytree
