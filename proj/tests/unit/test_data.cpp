#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "svytree/csv.hpp"
#include "svytree/data.hpp"
#include "svytree/rng.hpp"

using namespace svytree;

namespace {

DatasetSchema schema_xy(bool weight) {
  DatasetSchema s;
  s.response = "y";
  s.predictors = {"x1", "x2"};
  if (weight) s.weight = "w";
  return s;
}

ObservedDataset read_text(const std::string& text, const DatasetSchema& schema) {
  std::istringstream in(text);
  return read_observed(in, schema);
}

}  // namespace

TEST(ReadObserved, ThreeRowsWithUnitWeights) {
  const auto data = read_text("y,x1,x2,w\n1,0.1,0.2,1\n2,0.3,0.4,1\n3,0.5,0.6,1\n", schema_xy(true));
  EXPECT_EQ(data.size(), 3u);
  EXPECT_EQ(data.dim(), 2u);
  EXPECT_EQ(data.weight, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(data.y, (std::vector<double>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(data.x(2, 1), 0.6);
  EXPECT_EQ(data.variable_names, (std::vector<std::string>{"x1", "x2"}));
}

TEST(ReadObserved, MissingWeightColumnMeansUnitWeights) {
  const auto data = read_text("x2,y,x1\n0.2,5,0.1\n0.4,6,0.3\n", schema_xy(false));
  EXPECT_EQ(data.weight, (std::vector<double>{1, 1}));
  EXPECT_DOUBLE_EQ(data.x(0, 0), 0.1);
  EXPECT_DOUBLE_EQ(data.x(0, 1), 0.2);
}

TEST(ReadObserved, ZeroWeightNamesTheRow) {
  try {
    read_text("y,x1,x2,w\n1,0,0,1\n2,0,0,0\n3,0,0,1\n", schema_xy(true));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "w");
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(ReadObserved, Errors) {
  EXPECT_THROW(read_text("", schema_xy(false)), DataError);
  EXPECT_THROW(read_text("y,x1\n1,2\n", schema_xy(false)), DataError);  // missing x2
  EXPECT_THROW(read_text("y,x1,x2\n1,abc,2\n", schema_xy(false)), DataError);
  EXPECT_THROW(read_text("y,x1,x2\n1,,2\n", schema_xy(false)), DataError);
  EXPECT_THROW(read_text("y,x1,x2\n1,2\n", schema_xy(false)), DataError);  // ragged
  EXPECT_THROW(read_text("y,x1,x2\n,,\n", schema_xy(false)), DataError);
  EXPECT_THROW(read_text("y,x1,x2\n1,nan,2\n", schema_xy(false)), DataError);
  EXPECT_THROW(read_text("y,x1,x2,w\n1,1,2,-3\n", schema_xy(true)), DataError);
  try {
    read_text("y,x1,x2\n1,2,3\n4,zz,6\n", schema_xy(false));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "x1");
  }
}

TEST(ReadObserved, QuotedFieldsCommentsAndBom) {
  const auto data = read_text("\xEF\xBB\xBF# produced by hand\n\"y\",x1,x2\n\"1.5\",2,3\n\n", schema_xy(false));
  ASSERT_EQ(data.size(), 1u);
  EXPECT_DOUBLE_EQ(data.y[0], 1.5);
}

TEST(ReadPopulation, RequiresPositiveSize) {
  DatasetSchema s = schema_xy(false);
  s.size = "z";
  std::istringstream ok("y,x1,x2,z\n1,2,3,4\n5,6,7,8\n");
  const auto pop = read_population(ok, s);
  EXPECT_EQ(pop.size(), 2u);
  EXPECT_EQ(pop.ids, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(pop.z, (std::vector<double>{4, 8}));
  std::istringstream bad("y,x1,x2,z\n1,2,3,0\n");
  EXPECT_THROW(read_population(bad, s), DataError);
  std::istringstream none("y,x1,x2\n1,2,3\n");
  EXPECT_THROW(read_population(none, schema_xy(false)), std::exception);
}

TEST(Schema, Validation) {
  DatasetSchema s = schema_xy(true);
  EXPECT_NO_THROW(s.validate());
  s.weight = "x1";
  EXPECT_THROW(s.validate(), std::invalid_argument);
  DatasetSchema empty;
  empty.response = "y";
  EXPECT_THROW(empty.validate(), std::invalid_argument);
}

TEST(RoundTrip, ObservedDatasetSurvivesWriteAndRead) {
  Engine eng(42);
  ObservedDataset data;
  data.x = Matrix(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    data.y.push_back((uniform01(eng) - 0.5) * 1e6);
    data.x(i, 0) = uniform01(eng) / 3.0;
    data.x(i, 1) = std::ldexp(uniform01(eng), -40);
    data.weight.push_back(1.0 / (uniform01(eng) + 1e-3));
  }
  data.variable_names = {"x1", "x2"};
  std::ostringstream out;
  write_observed(out, data, "y", "w");
  const auto back = read_text(out.str(), schema_xy(true));
  EXPECT_EQ(back, data);

  std::ostringstream again;
  write_observed(again, back, "y", "w");
  EXPECT_EQ(again.str(), out.str());
}

TEST(RoundTrip, PopulationSurvivesWriteAndRead) {
  FinitePopulation pop;
  pop.ids = {0, 1, 2};
  pop.y = {0.1, -2.5, 1e-300};
  pop.x = Matrix(3, 2, {1, 2, 3, 4, 5, 6.25});
  pop.z = {0.5, 1.5, 2.0};
  pop.variable_names = {"x1", "x2"};
  std::ostringstream out;
  write_population(out, pop);
  DatasetSchema s = schema_xy(false);
  s.size = "z";
  std::istringstream in(out.str());
  EXPECT_EQ(read_population(in, s), pop);
}

TEST(Validate, CleanDatasetHasEmptyReport) {
  ObservedDataset data;
  data.y = {1, 2};
  data.x = Matrix(2, 1, {0.5, 0.7});
  data.weight = {1, 2};
  EXPECT_TRUE(validate_dataset(data).empty());
}

TEST(Validate, NanInXNamesCell) {
  ObservedDataset data;
  data.y = {1, 2};
  data.x = Matrix(2, 2, {0.5, 0.7, std::numeric_limits<double>::quiet_NaN(), 0.1});
  data.weight = {1, 2};
  data.variable_names = {"a", "b"};
  const auto report = validate_dataset(data);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].row, 2u);
  EXPECT_EQ(report[0].column, "a");
}

TEST(Validate, MismatchedRowCountsIsOneViolation) {
  ObservedDataset data;
  data.y = {1, 2};
  data.x = Matrix(2, 1, {0.5, 0.7});
  data.weight = {1, 2, 3};
  EXPECT_EQ(validate_dataset(data).size(), 1u);
}

TEST(Validate, ReportsEveryViolationAndIsPure) {
  ObservedDataset data;
  data.y = {std::numeric_limits<double>::infinity(), 2, 3};
  data.x = Matrix(3, 1, {0.5, 0.7, 0.9});
  data.weight = {1, 0, -1};
  const auto a = validate_dataset(data);
  const auto b = validate_dataset(data);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(to_string(a).empty());
}

TEST(Validate, Population) {
  FinitePopulation pop;
  pop.ids = {0, 1};
  pop.y = {1, 2};
  pop.x = Matrix(2, 1, {0, 1});
  pop.z = {1, 0};
  const auto report = validate_population(pop);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].row, 2u);
}

TEST(AsObserved, UnitWeightsAndOrigin) {
  FinitePopulation pop;
  pop.ids = {0, 1, 2};
  pop.y = {1, 2, 3};
  pop.x = Matrix(3, 1, {0, 1, 2});
  pop.z = {1, 1, 1};
  const auto obs = as_observed(pop);
  EXPECT_EQ(obs.weight, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(obs.origin, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(obs.x, pop.x);
}

TEST(Csv, FormatDoubleRoundTrips) {
  Engine eng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(uniform01(eng) - 0.5, static_cast<int>(uniform_below(eng, 200)) - 100);
    EXPECT_EQ(csv::parse_double(csv::format_double(v), 1, "c"), v);
  }
  EXPECT_EQ(csv::parse_double("+2.5", 1, "c"), 2.5);
  EXPECT_THROW(csv::parse_double("inf", 1, "c"), DataError);
  EXPECT_THROW(csv::parse_double("1.5x", 1, "c"), DataError);
}
