#include "svytree/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "svytree/csv.hpp"
#include "svytree/estimators.hpp"
#include "svytree/rng.hpp"

namespace svytree {

namespace {

double regression_surface(Shape shape, std::span<const double> x) {
  switch (shape) {
    case Shape::step: {
      double f = x[0] > 0.5 ? 1.0 : 0.0;
      if (x.size() > 1 && x[1] > 0.5) f += 0.5;
      return f;
    }
    case Shape::smooth: {
      double f = 0.0;
      for (double v : x) f += v + 0.5 * std::sin(2.0 * std::numbers::pi * v);
      return 2.0 * f / static_cast<double>(x.size());
    }
    case Shape::constant:
      return 0.0;
  }
  return 0.0;
}

double standard_normal(Engine& eng) {
  // Box-Muller on platform-independent uniforms.
  const double u1 = 1.0 - uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void standardize(std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double& e : v) {
    e -= mean;
    ss += e * e;
  }
  const double sd = std::sqrt(ss / n);
  if (sd > 0.0) {
    for (double& e : v) e /= sd;
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  if (N == 0) throw std::invalid_argument("generator: N must be >= 1");
  if (d == 0) throw std::invalid_argument("generator: d must be >= 1");
  if (!(noise >= 0.0 && std::isfinite(noise))) throw std::invalid_argument("generator: noise must be >= 0");
  if (!(target_cor > -1.0 && target_cor < 1.0)) {
    throw std::invalid_argument("generator: target correlation must lie in (-1, 1)");
  }
  if (!(size_floor > 0.0 && std::isfinite(size_floor))) {
    throw std::invalid_argument("generator: size_floor must be > 0");
  }
}

Shape parse_shape(const std::string& name) {
  if (name == "step") return Shape::step;
  if (name == "smooth") return Shape::smooth;
  if (name == "constant") return Shape::constant;
  throw std::invalid_argument("unknown shape '" + name + "' (expected step, smooth or constant)");
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::step: return "step";
    case Shape::smooth: return "smooth";
    case Shape::constant: return "constant";
  }
  return "?";
}

std::string to_string(Method m) { return m == Method::weighted ? "weighted" : "unweighted"; }

FinitePopulation synth_population(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  Engine eng(derive_seed(seed, {0x706f70ULL}));
  FinitePopulation pop;
  pop.x = Matrix(spec.N, spec.d);
  pop.y.resize(spec.N);
  pop.ids.resize(spec.N);
  for (std::size_t l = 0; l < spec.d; ++l) pop.variable_names.push_back("x" + std::to_string(l + 1));

  for (std::size_t i = 0; i < spec.N; ++i) {
    pop.ids[i] = i;
    for (std::size_t l = 0; l < spec.d; ++l) pop.x(i, l) = uniform01(eng);
    const double f = regression_surface(spec.shape, pop.x.row(i));
    pop.y[i] = std::exp(f + spec.noise * standard_normal(eng));
  }

  // Size measure: rho * std(y) + sqrt(1 - rho^2) * e, with e a skewed
  // (exponential) noise residualized against y so the sample correlation is
  // exactly rho, then shifted to be positive.
  std::vector<double> ys = pop.y;
  standardize(ys);
  std::vector<double> e(spec.N);
  for (double& v : e) v = -std::log(1.0 - uniform01(eng));
  standardize(e);
  double dot = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < spec.N; ++i) {
    dot += e[i] * ys[i];
    yy += ys[i] * ys[i];
  }
  if (yy > 0.0) {
    for (std::size_t i = 0; i < spec.N; ++i) e[i] -= dot / yy * ys[i];
  }
  standardize(e);
  const double rho = spec.target_cor;
  const double rest = std::sqrt(1.0 - rho * rho);
  std::vector<double> z(spec.N);
  for (std::size_t i = 0; i < spec.N; ++i) z[i] = rho * ys[i] + rest * e[i];
  const double lowest = *std::min_element(z.begin(), z.end());
  for (double& v : z) v = v - lowest + spec.size_floor;
  pop.z = std::move(z);
  return pop;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("correlation: length mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

TreeModel fit_population_tree(const FinitePopulation& pop, const FitConfig& cfg) {
  if (const auto report = validate_population(pop); !report.empty()) {
    throw std::invalid_argument("invalid population\n" + to_string(report));
  }
  return fit_tree(as_observed(pop), cfg);
}

TreeModel population_on_sample_partition(const TreeModel& sample_model, const FinitePopulation& pop,
                                         std::size_t k, double gamma) {
  if (pop.dim() != sample_model.d) {
    throw std::invalid_argument("population_on_sample_partition: dimension mismatch");
  }
  TreeModel out = sample_model;
  out.n = pop.size();
  out.k = k;
  out.gamma = gamma;
  for (auto& node : out.nodes) {
    node.sample_count = 0;
    node.weighted_count = 0.0;
  }
  std::vector<std::vector<std::size_t>> members(out.nodes.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto x = pop.x.row(i);
    std::size_t idx = 0;
    for (;;) {
      auto& node = out.nodes[idx];
      node.sample_count += 1;
      node.weighted_count += 1.0;
      if (node.is_leaf) break;
      idx = static_cast<std::size_t>(x[node.variable] <= node.cutpoint ? node.left : node.right);
    }
    members[idx].push_back(i);
  }
  const std::vector<double> unit(pop.size(), 1.0);
  for (std::size_t idx = 0; idx < out.nodes.size(); ++idx) {
    auto& node = out.nodes[idx];
    if (!node.is_leaf) continue;
    node.dense = members[idx].size() > k;
    if (members[idx].empty()) {
      node.estimate = 0.0;
      continue;
    }
    std::vector<double> y;
    y.reserve(members[idx].size());
    for (std::size_t i : members[idx]) y.push_back(pop.y[i]);
    const WeightedSlice s(y, std::span<const double>(unit).first(y.size()));
    if (node.dense) {
      node.estimate = trimmed_mean(s, gamma);
    } else {
      node.estimate = out.config.sparse_leaf_value == SparseLeafValue::zero ? 0.0 : hajek_mean(s);
    }
  }
  return out;
}

Discrepancy tree_discrepancy(const TreeModel& model, const TreeModel& reference,
                             const FinitePopulation& pop) {
  if (model.d != reference.d || model.d != pop.dim()) {
    throw std::invalid_argument("tree_discrepancy: dimension mismatch");
  }
  Discrepancy out;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double diff = predict(model, pop.x.row(i)) - predict(reference, pop.x.row(i));
    out.mean_error += diff;
    out.mse += diff * diff;
  }
  const double n = static_cast<double>(pop.size());
  out.mean_error /= n;
  out.mse /= n;
  return out;
}

void SimConfig::validate(std::size_t population_size) const {
  fit.validate();
  if (reps == 0) throw std::invalid_argument("simulation: reps must be >= 1");
  if (sample_sizes.empty()) throw std::invalid_argument("simulation: no sample sizes");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] == 0) throw std::invalid_argument("simulation: sample size must be >= 1");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
      throw std::invalid_argument("simulation: sample sizes must be strictly increasing");
    }
    if (sample_sizes[i] > population_size) {
      throw std::invalid_argument("simulation: sample size " + std::to_string(sample_sizes[i]) +
                                  " exceeds population size " + std::to_string(population_size));
    }
  }
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, std::size_t rep) {
  return derive_seed(base, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
}

const AggregateRow& SimResult::aggregate(Method m, std::size_t n) const {
  for (const auto& row : aggregates) {
    if (row.method == m && row.n == n) return row;
  }
  throw std::out_of_range("no aggregate row for n=" + std::to_string(n));
}

std::vector<AggregateRow> aggregate_records(const std::vector<RepRecord>& records,
                                            std::span<const std::size_t> sample_sizes) {
  std::vector<AggregateRow> out;
  for (Method m : {Method::weighted, Method::unweighted}) {
    for (std::size_t n : sample_sizes) {
      std::vector<double> err;
      std::vector<double> mse;
      for (const auto& r : records) {
        if (r.method == m && r.n == n) {
          err.push_back(r.mean_error);
          mse.push_back(r.mse);
        }
      }
      if (err.empty()) continue;
      const double R = static_cast<double>(err.size());
      AggregateRow row;
      row.method = m;
      row.n = n;
      row.bias = std::accumulate(err.begin(), err.end(), 0.0) / R;
      const double mean_mse = std::accumulate(mse.begin(), mse.end(), 0.0) / R;
      row.rmse = std::sqrt(mean_mse);
      if (err.size() > 1) {
        double ve = 0.0;
        double vm = 0.0;
        for (std::size_t i = 0; i < err.size(); ++i) {
          ve += (err[i] - row.bias) * (err[i] - row.bias);
          vm += (mse[i] - mean_mse) * (mse[i] - mean_mse);
        }
        row.bias_se = std::sqrt(ve / (R - 1.0) / R);
        const double se_mse = std::sqrt(vm / (R - 1.0) / R);
        row.rmse_se = row.rmse > 0.0 ? se_mse / (2.0 * row.rmse) : 0.0;
      }
      out.push_back(row);
    }
  }
  return out;
}

SimResult run_simulation(const FinitePopulation& pop, const SimConfig& cfg) {
  if (const auto report = validate_population(pop); !report.empty()) {
    throw std::invalid_argument("invalid population\n" + to_string(report));
  }
  cfg.validate(pop.size());

  const TreeModel reference = fit_population_tree(pop, cfg.fit);
  const std::vector<double> reference_pred = predict(reference, pop.x);

  std::vector<std::vector<double>> probs;
  SimResult result;
  result.population_size = pop.size();
  result.reference_leaves = reference.leaf_count();
  for (std::size_t n : cfg.sample_sizes) {
    probs.push_back(pps_inclusion_probs(pop.z, n));
    result.designs.push_back(design_summary(pop, probs.back()));
  }

  const std::size_t tasks = cfg.sample_sizes.size() * cfg.reps;
  result.records.resize(2 * tasks);

  auto discrepancy = [&](const TreeModel& model) {
    Discrepancy d;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const double diff = predict(model, pop.x.row(i)) - reference_pred[i];
      d.mean_error += diff;
      d.mse += diff * diff;
    }
    d.mean_error /= static_cast<double>(pop.size());
    d.mse /= static_cast<double>(pop.size());
    return d;
  };

  auto run_task = [&](std::size_t task) {
    const std::size_t size_idx = task / cfg.reps;
    const std::size_t rep = task % cfg.reps;
    const std::size_t n = cfg.sample_sizes[size_idx];
    const auto drawn = draw_pps_sample(probs[size_idx], replicate_seed(cfg.seed, n, rep));
    ObservedDataset sample = take_sample(pop, drawn);
    const auto weighted = discrepancy(fit_tree(sample, cfg.fit));
    std::fill(sample.weight.begin(), sample.weight.end(), 1.0);
    const auto unweighted = discrepancy(fit_tree(sample, cfg.fit));
    result.records[2 * task] = {Method::weighted, n, rep, weighted.mean_error, weighted.mse};
    result.records[2 * task + 1] = {Method::unweighted, n, rep, unweighted.mean_error, unweighted.mse};
  };

  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, std::max<std::size_t>(tasks, 1));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t t = next++; t < tasks; t = next++) {
            try {
              run_task(t);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  result.aggregates = aggregate_records(result.records, cfg.sample_sizes);
  return result;
}

std::string config_header(const SimConfig& cfg) {
  const auto& r = cfg.fit.rates;
  std::ostringstream os;
  os << "# alpha=" << csv::format_double(r.alpha) << '\n'
     << "# epsilon=" << csv::format_double(r.epsilon) << '\n'
     << "# gamma_form=" << (r.gamma_form == GammaForm::log ? "log" : "power") << '\n'
     << "# gamma_scale=" << (r.gamma_scale ? csv::format_double(*r.gamma_scale) : "auto") << '\n'
     << "# p_threshold=" << csv::format_double(cfg.fit.p_threshold) << '\n'
     << "# use_weighted_median=" << (cfg.fit.use_weighted_median ? "true" : "false") << '\n'
     << "# sparse_leaf=" << (cfg.fit.sparse_leaf_value == SparseLeafValue::zero ? "zero" : "hajek") << '\n'
     << "# reps=" << cfg.reps << '\n'
     << "# seed=" << cfg.seed << '\n'
     << "# sizes=";
  for (std::size_t i = 0; i < cfg.sample_sizes.size(); ++i) {
    os << (i ? "," : "") << cfg.sample_sizes[i];
  }
  os << '\n';
  return os.str();
}

void write_rep_csv(std::ostream& out, const SimResult& result, const std::string& header) {
  out << header << "method,n,rep,mean_error,mse\n";
  for (const auto& r : result.records) {
    out << to_string(r.method) << ',' << r.n << ',' << r.rep << ',' << csv::format_double(r.mean_error)
        << ',' << csv::format_double(r.mse) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const SimResult& result, const std::string& header) {
  out << header << "method,n,bias,bias_se,rmse,rmse_se\n";
  for (const auto& a : result.aggregates) {
    out << to_string(a.method) << ',' << a.n << ',' << csv::format_double(a.bias) << ','
        << csv::format_double(a.bias_se) << ',' << csv::format_double(a.rmse) << ','
        << csv::format_double(a.rmse_se) << '\n';
  }
}

double dense_box_mass(const TreeModel& model, const Matrix& x, std::span<const double> weights,
                      std::size_t k) {
  if (weights.size() != x.rows()) throw std::invalid_argument("dense_box_mass: weight count mismatch");
  std::vector<std::size_t> leaf(x.rows());
  std::vector<std::size_t> counts(model.nodes.size(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    leaf[i] = model.leaf_index(x.row(i));
    ++counts[leaf[i]];
  }
  double dense = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    total += weights[i];
    if (counts[leaf[i]] >= k) dense += weights[i];
  }
  return total > 0.0 ? dense / total : 0.0;
}

double dense_box_mass(const TreeModel& model, const ObservedDataset& data, std::size_t k) {
  return dense_box_mass(model, data.x, data.weight, k);
}

std::vector<NormRow> norm_report(const TreeModel& model, const Matrix& x,
                                 std::span<const double> weights) {
  if (x.cols() != model.d) throw std::invalid_argument("norm_report: dimension mismatch");
  const Partition partition = model.to_partition(x);
  std::vector<NormRow> rows;
  for (std::size_t l = 0; l < model.d; ++l) {
    NormRow row;
    row.variable = l < model.variable_names.size() ? model.variable_names[l] : "x" + std::to_string(l + 1);
    row.norm_right = partition_norm(partition, x, weights, l, EdfVariant::right);
    row.norm_left_limit = partition_norm(partition, x, weights, l, EdfVariant::left_limit);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<NormRow> norm_report(const TreeModel& model, const ObservedDataset& data) {
  return norm_report(model, data.x, data.weight);
}

void write_diagnostics(std::ostream& out, const Diagnostics& diag) {
  out << "variable,norm_right,norm_left_limit\n";
  for (const auto& row : diag.norms) {
    out << row.variable << ',' << csv::format_double(row.norm_right) << ','
        << csv::format_double(row.norm_left_limit) << '\n';
  }
  out << "dense_box_mass," << csv::format_double(diag.dense_box_mass) << ",\n";
  out << "k," << diag.k << ",\n";
  out << "gamma," << (std::isinf(diag.gamma) ? std::string("inf") : csv::format_double(diag.gamma)) << ",\n";
  if (diag.sampling_fraction) {
    out << "sampling_fraction," << csv::format_double(*diag.sampling_fraction) << ",\n";
  }
}

}  // namespace svytree
