#include "svytree/data.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "svytree/csv.hpp"

namespace svytree {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: value count does not match rows*cols");
  }
}

void Matrix::append_row(std::span<const double> r) {
  if (rows_ == 0 && cols_ == 0) cols_ = r.size();
  if (r.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
  values_.insert(values_.end(), r.begin(), r.end());
  ++rows_;
}

namespace {

std::string locate(const std::string& message, std::size_t row, const std::string& column) {
  std::string out;
  if (row > 0) out += "row " + std::to_string(row);
  if (!column.empty()) out += (out.empty() ? "column '" : ", column '") + column + "'";
  return out.empty() ? message : out + ": " + message;
}

std::size_t require_column(const csv::Table& table, const std::string& name) {
  auto idx = table.column(name);
  if (!idx) throw DataError("missing column '" + name + "'", 0, name);
  return *idx;
}

std::vector<std::size_t> predictor_columns(const csv::Table& table,
                                           const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& name : names) cols.push_back(require_column(table, name));
  return cols;
}

Matrix read_matrix(const csv::Table& table, const std::vector<std::string>& names) {
  const auto cols = predictor_columns(table, names);
  Matrix x(table.rows.size(), cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      x(r, j) = csv::parse_double(table.rows[r][cols[j]], r + 1, names[j]);
    }
  }
  return x;
}

std::vector<double> read_positive(const csv::Table& table, const std::string& name) {
  const auto col = require_column(table, name);
  std::vector<double> out(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out[r] = csv::parse_double(table.rows[r][col], r + 1, name);
    if (!(out[r] > 0.0)) {
      throw DataError("value must be strictly positive, got " + csv::format_double(out[r]),
                      r + 1, name);
    }
  }
  return out;
}

std::vector<double> read_column(const csv::Table& table, const std::string& name) {
  const auto col = require_column(table, name);
  std::vector<double> out(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out[r] = csv::parse_double(table.rows[r][col], r + 1, name);
  }
  return out;
}

void check_lengths(ValidationReport& report, std::size_t n, const Matrix& x,
                   std::size_t other, const char* other_name) {
  if (x.rows() != n) {
    report.push_back({0, "x", "predictor matrix has " + std::to_string(x.rows()) +
                                  " rows but response has " + std::to_string(n)});
  }
  if (other != n) {
    report.push_back({0, other_name, std::string(other_name) + " has " + std::to_string(other) +
                                         " entries but response has " + std::to_string(n)});
  }
}

void check_x(ValidationReport& report, const Matrix& x, const std::vector<std::string>& names) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!std::isfinite(x(r, c))) {
        const std::string col = c < names.size() ? names[c] : "x" + std::to_string(c + 1);
        report.push_back({r + 1, col, "non-finite predictor value"});
      }
    }
  }
}

}  // namespace

DataError::DataError(const std::string& message, std::size_t row, std::string column)
    : std::runtime_error(locate(message, row, column)), row_(row), column_(std::move(column)) {}

void DatasetSchema::validate() const {
  if (predictors.empty()) throw std::invalid_argument("schema: at least one predictor required");
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (name.empty()) throw std::invalid_argument("schema: empty column name");
    if (!seen.insert(name).second) {
      throw std::invalid_argument("schema: column '" + name + "' named more than once");
    }
  };
  add(response);
  for (const auto& p : predictors) add(p);
  if (weight) add(*weight);
  if (size) add(*size);
}

ObservedDataset read_observed(std::istream& in, const DatasetSchema& schema) {
  schema.validate();
  const auto table = csv::read(in);
  ObservedDataset data;
  data.variable_names = schema.predictors;
  data.y = read_column(table, schema.response);
  data.x = read_matrix(table, schema.predictors);
  if (schema.weight) {
    data.weight = read_positive(table, *schema.weight);
  } else {
    data.weight.assign(data.y.size(), 1.0);
  }
  return data;
}

FinitePopulation read_population(std::istream& in, const DatasetSchema& schema) {
  schema.validate();
  if (!schema.size) throw std::invalid_argument("schema: population requires a size-measure column");
  const auto table = csv::read(in);
  FinitePopulation pop;
  pop.variable_names = schema.predictors;
  pop.y = read_column(table, schema.response);
  pop.x = read_matrix(table, schema.predictors);
  pop.z = read_positive(table, *schema.size);
  pop.ids.resize(pop.y.size());
  for (std::size_t i = 0; i < pop.ids.size(); ++i) pop.ids[i] = i;
  return pop;
}

Matrix read_predictors(std::istream& in, const std::vector<std::string>& predictors) {
  if (predictors.empty()) throw std::invalid_argument("at least one predictor required");
  const auto table = csv::read(in);
  return read_matrix(table, predictors);
}

void write_observed(std::ostream& out, const ObservedDataset& data,
                    const std::string& response_name, const std::string& weight_name) {
  out << response_name;
  for (const auto& name : data.variable_names) out << ',' << name;
  out << ',' << weight_name << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << csv::format_double(data.y[i]);
    for (std::size_t j = 0; j < data.dim(); ++j) out << ',' << csv::format_double(data.x(i, j));
    out << ',' << csv::format_double(data.weight[i]) << '\n';
  }
}

void write_population(std::ostream& out, const FinitePopulation& pop,
                      const std::string& response_name, const std::string& size_name) {
  out << response_name;
  for (const auto& name : pop.variable_names) out << ',' << name;
  out << ',' << size_name << '\n';
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out << csv::format_double(pop.y[i]);
    for (std::size_t j = 0; j < pop.dim(); ++j) out << ',' << csv::format_double(pop.x(i, j));
    out << ',' << csv::format_double(pop.z[i]) << '\n';
  }
}

ValidationReport validate_dataset(const ObservedDataset& data) {
  ValidationReport report;
  const std::size_t n = data.y.size();
  if (n == 0) report.push_back({0, "", "dataset has no rows"});
  if (data.x.cols() == 0) report.push_back({0, "x", "dataset has no predictors"});
  check_lengths(report, n, data.x, data.weight.size(), "weight");
  if (!data.origin.empty() && data.origin.size() != n) {
    report.push_back({0, "origin", "origin index count does not match row count"});
  }
  if (!data.variable_names.empty() && data.variable_names.size() != data.x.cols()) {
    report.push_back({0, "x", "variable name count does not match predictor count"});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(data.y[i])) report.push_back({i + 1, "y", "non-finite response"});
  }
  check_x(report, data.x, data.variable_names);
  for (std::size_t i = 0; i < data.weight.size(); ++i) {
    if (!(std::isfinite(data.weight[i]) && data.weight[i] > 0.0)) {
      report.push_back({i + 1, "weight", "weight must be finite and strictly positive"});
    }
  }
  return report;
}

ValidationReport validate_population(const FinitePopulation& pop) {
  ValidationReport report;
  const std::size_t n = pop.y.size();
  if (n == 0) report.push_back({0, "", "population has no rows"});
  if (pop.x.cols() == 0) report.push_back({0, "x", "population has no predictors"});
  check_lengths(report, n, pop.x, pop.z.size(), "z");
  if (pop.ids.size() != n) report.push_back({0, "ids", "identifier count does not match row count"});
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(pop.y[i])) report.push_back({i + 1, "y", "non-finite response"});
  }
  check_x(report, pop.x, pop.variable_names);
  for (std::size_t i = 0; i < pop.z.size(); ++i) {
    if (!(std::isfinite(pop.z[i]) && pop.z[i] > 0.0)) {
      report.push_back({i + 1, "z", "size measure must be finite and strictly positive"});
    }
  }
  return report;
}

ObservedDataset as_observed(const FinitePopulation& pop) {
  ObservedDataset data;
  data.y = pop.y;
  data.x = pop.x;
  data.weight.assign(pop.size(), 1.0);
  data.origin.resize(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) data.origin[i] = i;
  data.variable_names = pop.variable_names;
  return data;
}

std::string to_string(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& v : report) {
    os << locate(v.message, v.row, v.column) << '\n';
  }
  return os.str();
}

}  // namespace svytree
