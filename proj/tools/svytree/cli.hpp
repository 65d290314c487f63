#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "svytree/simlab.hpp"

namespace svytree::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by main() and the tests. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Static SVG with two panels (bias and RMSE against n), one line per method.
std::string render_chart(const SimResult& result);

}  // namespace svytree::cli
