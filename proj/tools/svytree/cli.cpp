#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "svytree/csv.hpp"
#include "svytree/data.hpp"
#include "svytree/design.hpp"
#include "svytree/tree_io.hpp"

namespace svytree::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20110101;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaFlags {
  std::string response = "y";
  std::vector<std::string> predictors;
  std::string weight;
  std::string size;
};

struct FitFlags {
  double alpha = 0.6;
  double epsilon = 0.05;
  std::string gamma_form = "log";
  std::string gamma_scale = "auto";
  double p_threshold = 5.0;
  std::string sparse_leaf = "zero";
  std::string median = "weighted";

  FitConfig to_config() const {
    FitConfig cfg;
    cfg.rates.alpha = alpha;
    cfg.rates.epsilon = epsilon;
    cfg.rates.gamma_form = gamma_form == "power" ? GammaForm::power : GammaForm::log;
    if (gamma_scale == "inf") {
      cfg.rates.gamma_scale = std::numeric_limits<double>::infinity();
    } else if (gamma_scale != "auto") {
      try {
        cfg.rates.gamma_scale = csv::parse_double(gamma_scale, 0, "gamma-scale");
      } catch (const DataError&) {
        throw UsageError("--gamma-scale must be 'auto', 'inf' or a positive number");
      }
    }
    cfg.p_threshold = p_threshold;
    cfg.sparse_leaf_value = sparse_leaf == "hajek" ? SparseLeafValue::hajek : SparseLeafValue::zero;
    cfg.use_weighted_median = median == "weighted";
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

void add_schema_flags(CLI::App* cmd, SchemaFlags& s, bool with_size) {
  cmd->add_option("--schema-response", s.response, "Response column")->capture_default_str();
  cmd->add_option("--schema-predictors", s.predictors,
                  "Predictor columns, comma separated (default: every other column)")
      ->delimiter(',');
  cmd->add_option("--schema-weight", s.weight, "Design weight column (default: all weights 1)");
  if (with_size) cmd->add_option("--schema-size", s.size, "Size-measure column");
}

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--alpha", f.alpha, "k(n) = ceil(n^alpha), alpha in (1/2, 1)")->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Power-form trimming exponent offset")->capture_default_str();
  cmd->add_option("--gamma-form", f.gamma_form, "Trimming growth: log or power")
      ->check(CLI::IsMember({"log", "power"}))
      ->capture_default_str();
  cmd->add_option("--gamma-scale", f.gamma_scale, "Trimming scale: auto, inf or a positive number")
      ->capture_default_str();
  cmd->add_option("--p-threshold", f.p_threshold, "Minimum SSE reduction (%) for an MSE split")
      ->capture_default_str();
  cmd->add_option("--sparse-leaf", f.sparse_leaf, "Estimate for leaves with <= k rows: zero or hajek")
      ->check(CLI::IsMember({"zero", "hajek"}))
      ->capture_default_str();
  cmd->add_option("--median", f.median, "Fallback median: weighted or unweighted")
      ->check(CLI::IsMember({"weighted", "unweighted"}))
      ->capture_default_str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void guard_output(const std::string& out, std::initializer_list<std::string> inputs) {
  for (const auto& in : inputs) {
    if (in.empty() || !fs::exists(in) || !fs::exists(out)) continue;
    if (fs::equivalent(in, out)) throw UsageError("output '" + out + "' would overwrite input '" + in + "'");
  }
}

DatasetSchema make_schema(const SchemaFlags& flags, const std::string& text) {
  DatasetSchema schema;
  schema.response = flags.response;
  if (!flags.weight.empty()) schema.weight = flags.weight;
  if (!flags.size.empty()) schema.size = flags.size;
  schema.predictors = flags.predictors;
  if (schema.predictors.empty()) {
    std::istringstream in(text);
    const auto table = csv::read(in);
    for (const auto& col : table.header) {
      if (col == schema.response || (schema.weight && col == *schema.weight) ||
          (schema.size && col == *schema.size)) {
        continue;
      }
      schema.predictors.push_back(col);
    }
    if (schema.predictors.empty()) throw DataError("no predictor columns found");
  }
  try {
    schema.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return schema;
}

int cmd_fit(const std::string& data_path, const std::string& out_path, const SchemaFlags& sf,
            const FitFlags& ff, std::ostream& out) {
  const FitConfig cfg = ff.to_config();
  guard_output(out_path, {data_path});
  const auto text = read_file(data_path);
  const auto schema = make_schema(sf, text);
  std::istringstream in(text);
  const auto data = read_observed(in, schema);
  const auto model = fit_tree(data, cfg);
  write_file(out_path, serialize_tree(model));
  out << "n=" << model.n << " d=" << model.d << " k=" << model.k << " gamma=" << model.gamma
      << " leaves=" << model.leaf_count() << '\n';
  out << render_tree(model);
  return kExitOk;
}

std::vector<std::string> predictor_names(const TreeModel& model, const SchemaFlags& sf) {
  if (sf.predictors.empty()) return model.variable_names;
  if (sf.predictors.size() != model.d) {
    throw DataError("tree has " + std::to_string(model.d) + " predictors but " +
                    std::to_string(sf.predictors.size()) + " were given");
  }
  return sf.predictors;
}

TreeModel load_tree(const std::string& path) {
  const auto text = read_file(path);
  return parse_tree(text);
}

int cmd_predict(const std::string& tree_path, const std::string& data_path, const std::string& out_path,
                const SchemaFlags& sf) {
  guard_output(out_path, {tree_path, data_path});
  const auto model = load_tree(tree_path);
  const auto names = predictor_names(model, sf);
  std::istringstream in(read_file(data_path));
  const auto x = read_predictors(in, names);
  std::ostringstream os;
  os << "row_id,prediction\n";
  for (std::size_t i = 0; i < x.rows(); ++i) {
    os << (i + 1) << ',' << csv::format_double(predict(model, x.row(i))) << '\n';
  }
  write_file(out_path, os.str());
  return kExitOk;
}

int cmd_diagnose(const std::string& tree_path, const std::string& data_path, const std::string& out_path,
                 const SchemaFlags& sf, std::size_t population_size) {
  guard_output(out_path, {tree_path, data_path});
  const auto model = load_tree(tree_path);
  const auto names = predictor_names(model, sf);
  const auto text = read_file(data_path);
  std::istringstream in(text);
  const auto table = csv::read(in);
  std::vector<double> weights(table.rows.size(), 1.0);
  if (!sf.weight.empty()) {
    const auto col = table.column(sf.weight);
    if (!col) throw DataError("missing column '" + sf.weight + "'", 0, sf.weight);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      weights[r] = csv::parse_double(table.rows[r][*col], r + 1, sf.weight);
      if (!(weights[r] > 0.0)) throw DataError("value must be strictly positive", r + 1, sf.weight);
    }
  }
  std::istringstream again(text);
  const auto x = read_predictors(again, names);

  Diagnostics diag;
  diag.norms = norm_report(model, x, weights);
  diag.dense_box_mass = dense_box_mass(model, x, weights, model.k);
  diag.k = model.k;
  diag.gamma = model.gamma;
  if (population_size > 0) {
    diag.sampling_fraction = static_cast<double>(x.rows()) / static_cast<double>(population_size);
  }
  std::ostringstream os;
  write_diagnostics(os, diag);
  write_file(out_path, os.str());
  return kExitOk;
}

struct SimFlags {
  std::string population;
  std::vector<std::size_t> sizes{100, 200, 400, 800, 1600};
  std::size_t reps = 200;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string chart;
  std::size_t workers = 1;
  GeneratorSpec gen;
  std::string shape = "smooth";
};

int cmd_simulate(const SimFlags& flags, const SchemaFlags& sf, const FitFlags& ff, std::ostream& out) {
  SimConfig cfg;
  cfg.fit = ff.to_config();
  cfg.sample_sizes = flags.sizes;
  cfg.reps = flags.reps;
  cfg.seed = flags.seed;
  cfg.workers = flags.workers;

  FinitePopulation pop;
  std::string source;
  if (!flags.population.empty()) {
    SchemaFlags pop_flags = sf;
    if (pop_flags.size.empty()) pop_flags.size = "z";
    const auto text = read_file(flags.population);
    const auto schema = make_schema(pop_flags, text);
    std::istringstream in(text);
    pop = read_population(in, schema);
    source = "# population=" + flags.population + '\n';
  } else {
    GeneratorSpec gen = flags.gen;
    try {
      gen.shape = parse_shape(flags.shape);
      gen.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    pop = synth_population(gen, flags.seed);
    source = "# generator N=" + std::to_string(gen.N) + " d=" + std::to_string(gen.d) +
             " shape=" + to_string(gen.shape) + " noise=" + csv::format_double(gen.noise) +
             " cor=" + csv::format_double(gen.target_cor) +
             " size_floor=" + csv::format_double(gen.size_floor) + '\n';
  }
  try {
    cfg.validate(pop.size());
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }

  const auto result = run_simulation(pop, cfg);
  const std::string header = source + config_header(cfg);

  fs::create_directories(flags.out);
  const fs::path dir(flags.out);
  std::ostringstream reps;
  write_rep_csv(reps, result, header);
  write_file((dir / "reps.csv").string(), reps.str());
  std::ostringstream agg;
  write_aggregate_csv(agg, result, header);
  write_file((dir / "aggregate.csv").string(), agg.str());
  std::vector<std::pair<std::string, DesignSummary>> designs;
  for (const auto& d : result.designs) designs.emplace_back("pps", d);
  std::ostringstream design;
  design << header;
  write_design_summaries(design, designs);
  write_file((dir / "design.csv").string(), design.str());
  if (!flags.chart.empty()) write_file(flags.chart, render_chart(result));

  out << agg.str();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design-consistent regression trees for complex survey samples", "svytree"};
  app.require_subcommand(1);

  SchemaFlags schema;
  FitFlags fit_flags;
  std::string data_path;
  std::string out_path;
  std::string tree_path;

  auto* fit = app.add_subcommand("fit", "Fit a weighted regression tree and write it as JSON");
  fit->add_option("--data", data_path, "Sample CSV")->required();
  fit->add_option("--out", out_path, "Tree file to write")->required();
  add_schema_flags(fit, schema, false);
  add_fit_flags(fit, fit_flags);

  auto* pred = app.add_subcommand("predict", "Predict with a fitted tree");
  pred->add_option("--tree", tree_path, "Tree file")->required();
  pred->add_option("--data", data_path, "CSV with the tree's predictor columns")->required();
  pred->add_option("--out", out_path, "Predictions CSV (row_id,prediction)")->required();
  add_schema_flags(pred, schema, false);

  SimFlags sim_flags;
  FitFlags sim_fit;
  sim_fit.sparse_leaf = "hajek";
  auto* sim = app.add_subcommand("simulate", "Repeated PPS sampling: weighted vs unweighted trees");
  sim->add_option("--population", sim_flags.population, "Population CSV (default: synthetic generator)");
  sim->add_option("--sizes", sim_flags.sizes, "Sample sizes, comma separated")->delimiter(',')->capture_default_str();
  sim->add_option("--reps", sim_flags.reps, "Replicates per sample size")->capture_default_str();
  sim->add_option("--seed", sim_flags.seed, "Base seed")->capture_default_str();
  sim->add_option("--out", sim_flags.out, "Output directory (reps.csv, aggregate.csv, design.csv)")->required();
  sim->add_option("--chart", sim_flags.chart, "Write an SVG bias/RMSE chart to this path");
  sim->add_option("--workers", sim_flags.workers, "Worker threads")->capture_default_str();
  sim->add_option("--gen-n", sim_flags.gen.N, "Generator: population size")->capture_default_str();
  sim->add_option("--gen-d", sim_flags.gen.d, "Generator: number of predictors")->capture_default_str();
  sim->add_option("--gen-shape", sim_flags.shape, "Generator: step, smooth or constant")->capture_default_str();
  sim->add_option("--gen-noise", sim_flags.gen.noise, "Generator: log-scale noise sd")->capture_default_str();
  sim->add_option("--gen-cor", sim_flags.gen.target_cor, "Generator: Cor(y, size measure)")->capture_default_str();
  sim->add_option("--gen-size-floor", sim_flags.gen.size_floor, "Generator: smallest size measure")
      ->capture_default_str();
  add_schema_flags(sim, schema, true);
  add_fit_flags(sim, sim_fit);

  std::size_t population_size = 0;
  auto* diag = app.add_subcommand("diagnose", "Partition norms and dense-box mass of a tree on data");
  diag->add_option("--tree", tree_path, "Tree file")->required();
  diag->add_option("--data", data_path, "CSV with predictors (and optional weights)")->required();
  diag->add_option("--out", out_path, "Diagnostics CSV")->required();
  diag->add_option("--population-size", population_size, "Population size, to report n/N");
  add_schema_flags(diag, schema, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "svytree: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(data_path, out_path, schema, fit_flags, out);
    if (pred->parsed()) return cmd_predict(tree_path, data_path, out_path, schema);
    if (sim->parsed()) return cmd_simulate(sim_flags, schema, sim_fit, out);
    if (diag->parsed()) return cmd_diagnose(tree_path, data_path, out_path, schema, population_size);
  } catch (const UsageError& e) {
    err << "svytree: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "svytree: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace svytree::cli
