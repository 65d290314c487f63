#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "svytree/tree.hpp"

namespace svytree {

inline constexpr int kTreeFormatVersion = 1;

/// Malformed or unsupported tree document. `where()` is a JSON path
/// ("/root/left/cutpoint") or "byte N" for syntax errors.
class TreeFormatError : public std::runtime_error {
 public:
  TreeFormatError(const std::string& message, std::string where);
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// JSON document, two-space indent, shortest round-trip numbers. Infinite
/// values are written as the string "inf"; an unset gamma scale as "auto".
std::string serialize_tree(const TreeModel& model);
void serialize_tree(const TreeModel& model, std::ostream& out);

TreeModel parse_tree(const std::string& text);
TreeModel parse_tree(std::istream& in);

/// Indented human-readable rendering: one line per node with split, sample
/// count, weighted count and estimate.
std::string render_tree(const TreeModel& model);

}  // namespace svytree
