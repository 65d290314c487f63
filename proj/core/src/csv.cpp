#include "svytree/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>

#include "svytree/data.hpp"

namespace svytree::csv {

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) throw DataError("unterminated quoted field", row);
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

Table read(std::istream& in) {
  Table table;
  std::string line;
  std::size_t data_row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      // UTF-8 byte order mark
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (line.empty() || line.front() == '#') continue;
      for (auto& name : split_line(line, 0)) table.header.emplace_back(trim(name));
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    ++data_row;
    auto cells = split_line(line, data_row);
    bool all_empty = true;
    for (const auto& c : cells) {
      if (!trim(c).empty()) {
        all_empty = false;
        break;
      }
    }
    if (all_empty) throw DataError("row has only empty cells", data_row);
    if (cells.size() != table.header.size()) {
      throw DataError("expected " + std::to_string(table.header.size()) + " cells, found " +
                          std::to_string(cells.size()),
                      data_row);
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError("empty file: no header row");
  if (table.rows.empty()) throw DataError("file has a header but no data rows");
  return table;
}

double parse_double(std::string_view cell, std::size_t row, const std::string& column) {
  const auto text = trim(cell);
  if (text.empty()) throw DataError("missing value", row, column);
  std::string_view digits = text;
  if (digits.front() == '+') digits.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw DataError("non-numeric value '" + std::string(text) + "'", row, column);
  }
  if (!std::isfinite(value)) {
    throw DataError("non-finite value '" + std::string(text) + "'", row, column);
  }
  return value;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace svytree::csv
