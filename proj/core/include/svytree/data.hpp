#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svytree {

/// Row-major dense matrix of predictor values (rows = units, cols = variables).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const { return values_; }

  void append_row(std::span<const double> r);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Analyst-visible sample: response, predictors and design weights (1/pi).
struct ObservedDataset {
  std::vector<double> y;
  Matrix x;
  std::vector<double> weight;
  /// Row index in the population each unit was drawn from; empty when unknown.
  std::vector<std::size_t> origin;
  std::vector<std::string> variable_names;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }

  friend bool operator==(const ObservedDataset&, const ObservedDataset&) = default;
};

/// Complete finite universe used by the simulation tools.
struct FinitePopulation {
  std::vector<std::size_t> ids;
  std::vector<double> y;
  Matrix x;
  /// Positive size measure driving PPS selection.
  std::vector<double> z;
  std::vector<std::string> variable_names;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }

  friend bool operator==(const FinitePopulation&, const FinitePopulation&) = default;
};

struct DatasetSchema {
  std::string response;
  std::vector<std::string> predictors;
  std::optional<std::string> weight;
  std::optional<std::string> size;

  /// Throws std::invalid_argument on duplicate names or an empty predictor list.
  void validate() const;
};

/// Raised for malformed input files. `row` is the 1-based data row (0 for the
/// header or file-level problems); `column` is the column name when known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::size_t row = 0, std::string column = {});

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

ObservedDataset read_observed(std::istream& in, const DatasetSchema& schema);

/// Requires `schema.size`. Identifiers are the 0-based data row numbers.
FinitePopulation read_population(std::istream& in, const DatasetSchema& schema);

/// Reads only the named predictor columns (no response or weight needed).
Matrix read_predictors(std::istream& in, const std::vector<std::string>& predictors);

/// Writes a header row (response, predictors, weight) followed by one row per unit,
/// using shortest round-trip decimal formatting.
void write_observed(std::ostream& out, const ObservedDataset& data,
                    const std::string& response_name = "y",
                    const std::string& weight_name = "weight");

void write_population(std::ostream& out, const FinitePopulation& pop,
                      const std::string& response_name = "y",
                      const std::string& size_name = "z");

struct Violation {
  std::size_t row = 0;  // 1-based; 0 when not tied to a row
  std::string column;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_dataset(const ObservedDataset& data);
ValidationReport validate_population(const FinitePopulation& pop);

/// Unit-weight view of a population, e.g. for fitting the reference tree.
ObservedDataset as_observed(const FinitePopulation& pop);

std::string to_string(const ValidationReport& report);

}  // namespace svytree
