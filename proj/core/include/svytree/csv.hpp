#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svytree::csv {

// Minimal RFC-4180 reader: comma separator, optional double-quoted fields,
// header row required. Lines starting with '#' before the header are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws DataError on an empty file, ragged rows or all-empty rows.
Table read(std::istream& in);

/// Parses a base-10 floating point cell; throws DataError naming row/column.
double parse_double(std::string_view cell, std::size_t row, const std::string& column);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace svytree::csv
