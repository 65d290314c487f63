#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svytree/data.hpp"
#include "svytree/design.hpp"
#include "svytree/tree.hpp"

namespace svytree {

enum class Shape { step, smooth, constant };

/// Synthetic stand-in for a business-survey frame: uniform predictors, a
/// log-scale regression surface exp(f(x) + noise * e) (positive, right
/// skewed) and a size measure z whose Pearson correlation with y equals
/// `target_cor` up to rounding.
struct GeneratorSpec {
  std::size_t N = 7112;
  std::size_t d = 3;
  Shape shape = Shape::smooth;
  double noise = 0.5;
  double target_cor = 0.22;
  /// Smallest size measure relative to the standardized spread of z; smaller
  /// values give more dispersed inclusion probabilities.
  double size_floor = 0.5;

  void validate() const;
};

Shape parse_shape(const std::string& name);
std::string to_string(Shape shape);

FinitePopulation synth_population(const GeneratorSpec& spec, std::uint64_t seed);

/// Pearson correlation with population (1/N) moments; 0 if either side is constant.
double correlation(std::span<const double> a, std::span<const double> b);

/// The reference model T: fit_tree on every population row with unit weights.
TreeModel fit_population_tree(const FinitePopulation& pop, const FitConfig& cfg);

/// Keeps the split structure of `sample_model` but recomputes every node's
/// counts and every leaf's estimate from the population rows routed there
/// (unit weights, trimmed at gamma, sparse rule applied when count <= k).
TreeModel population_on_sample_partition(const TreeModel& sample_model, const FinitePopulation& pop,
                                         std::size_t k, double gamma);

struct Discrepancy {
  double mean_error = 0.0;  // N^-1 sum (t(x_i) - T(x_i))
  double mse = 0.0;         // N^-1 sum (t(x_i) - T(x_i))^2
};

Discrepancy tree_discrepancy(const TreeModel& model, const TreeModel& reference,
                             const FinitePopulation& pop);

enum class Method { weighted, unweighted };
std::string to_string(Method m);

struct SimConfig {
  std::vector<std::size_t> sample_sizes{100, 200, 400, 800, 1600};
  std::size_t reps = 200;
  std::uint64_t seed = 20110101;
  FitConfig fit;
  /// Worker threads; results do not depend on this value.
  std::size_t workers = 1;

  void validate(std::size_t population_size) const;
};

/// Seed of replicate `rep` at sample size `n`.
std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, std::size_t rep);

struct RepRecord {
  Method method = Method::weighted;
  std::size_t n = 0;
  std::size_t rep = 0;
  double mean_error = 0.0;
  double mse = 0.0;
};

struct AggregateRow {
  Method method = Method::weighted;
  std::size_t n = 0;
  double bias = 0.0;     // mean over reps of mean_error
  double bias_se = 0.0;  // sd(mean_error) / sqrt(reps)
  double rmse = 0.0;     // sqrt(mean over reps of mse)
  double rmse_se = 0.0;  // delta method: se(mean mse) / (2 rmse)
};

struct SimResult {
  std::vector<RepRecord> records;  // ordered by (n, rep, method)
  std::vector<AggregateRow> aggregates;  // ordered by (method, n)
  std::vector<DesignSummary> designs;  // one per sample size
  std::size_t population_size = 0;
  std::size_t reference_leaves = 0;

  const AggregateRow& aggregate(Method m, std::size_t n) const;
};

SimResult run_simulation(const FinitePopulation& pop, const SimConfig& cfg);

std::vector<AggregateRow> aggregate_records(const std::vector<RepRecord>& records,
                                            std::span<const std::size_t> sample_sizes);

/// "# key=value" lines echoing the fit and simulation settings.
std::string config_header(const SimConfig& cfg);

void write_rep_csv(std::ostream& out, const SimResult& result, const std::string& header = {});
void write_aggregate_csv(std::ostream& out, const SimResult& result, const std::string& header = {});

/// Weighted share of rows whose leaf receives >= k of the given rows.
double dense_box_mass(const TreeModel& model, const Matrix& x, std::span<const double> weights,
                      std::size_t k);
double dense_box_mass(const TreeModel& model, const ObservedDataset& data, std::size_t k);

struct NormRow {
  std::string variable;
  double norm_right = 0.0;
  double norm_left_limit = 0.0;
};

/// partition_norm of the model's leaf partition for every variable, both variants.
std::vector<NormRow> norm_report(const TreeModel& model, const Matrix& x,
                                 std::span<const double> weights);
std::vector<NormRow> norm_report(const TreeModel& model, const ObservedDataset& data);

struct Diagnostics {
  std::vector<NormRow> norms;
  double dense_box_mass = 0.0;
  std::size_t k = 0;
  double gamma = 0.0;
  std::optional<double> sampling_fraction;
};

/// variable,norm_right,norm_left_limit rows, then dense_box_mass / k / gamma
/// (and sampling_fraction when known) rows with the value in the second column.
void write_diagnostics(std::ostream& out, const Diagnostics& diag);

}  // namespace svytree
