#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cli.hpp"

namespace svytree::cli {

namespace {

constexpr double kPanelW = 360.0;
constexpr double kPanelH = 260.0;
constexpr double kMargin = 50.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Panel {
  const char* title;
  double AggregateRow::*field;
};

void draw_panel(std::ostringstream& os, const SimResult& result, const Panel& panel, double x0) {
  std::vector<std::size_t> sizes;
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& a : result.aggregates) {
    if (std::find(sizes.begin(), sizes.end(), a.n) == sizes.end()) sizes.push_back(a.n);
    const double v = a.*panel.field;
    lo = first ? v : std::min(lo, v);
    hi = first ? v : std::max(hi, v);
    first = false;
  }
  std::sort(sizes.begin(), sizes.end());
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double left = x0 + kMargin;
  const double top = 40.0;
  const double width = kPanelW - kMargin - 10.0;
  const double height = kPanelH - 70.0;
  const double lx = std::log(static_cast<double>(sizes.front()));
  const double rx = std::log(static_cast<double>(sizes.back()));
  auto px = [&](std::size_t n) {
    if (sizes.size() == 1) return left + width / 2.0;
    return left + (std::log(static_cast<double>(n)) - lx) / (rx - lx) * width;
  };
  auto py = [&](double v) { return top + (hi - v) / (hi - lo) * height; };

  os << "<text x=\"" << fmt(left + width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << panel.title << "</text>\n";
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(width)
     << "\" height=\"" << fmt(height) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  if (lo < 0.0 && hi > 0.0) {
    os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(py(0.0)) << "\" x2=\"" << fmt(left + width)
       << "\" y2=\"" << fmt(py(0.0)) << "\" stroke=\"#bbb\" stroke-dasharray=\"2,2\"/>\n";
  }
  for (std::size_t n : sizes) {
    os << "<text x=\"" << fmt(px(n)) << "\" y=\"" << fmt(top + height + 16)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << n << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    os << "<text x=\"" << fmt(left - 4) << "\" y=\"" << fmt(py(v) + 3)
       << "\" text-anchor=\"end\" font-size=\"10\">" << tick_label(v) << "</text>\n";
  }
  os << "<text x=\"" << fmt(left + width / 2) << "\" y=\"" << fmt(top + height + 34)
     << "\" text-anchor=\"middle\" font-size=\"11\">sample size n</text>\n";

  for (Method m : {Method::weighted, Method::unweighted}) {
    const bool weighted = m == Method::weighted;
    os << "<polyline fill=\"none\" stroke=\"" << (weighted ? "#1f5fa8" : "#c0392b") << "\" stroke-width=\"2\""
       << (weighted ? "" : " stroke-dasharray=\"6,3\"") << " points=\"";
    bool sep = false;
    for (const auto& a : result.aggregates) {
      if (a.method != m) continue;
      os << (sep ? " " : "") << fmt(px(a.n)) << ',' << fmt(py(a.*panel.field));
      sep = true;
    }
    os << "\"/>\n";
  }
}

}  // namespace

std::string render_chart(const SimResult& result) {
  std::ostringstream os;
  const double total_w = 2 * kPanelW;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(total_w) << "\" height=\""
     << fmt(kPanelH + 20) << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  draw_panel(os, result, {"Bias", &AggregateRow::bias}, 0.0);
  draw_panel(os, result, {"RMSE", &AggregateRow::rmse}, kPanelW);
  const double ly = kPanelH + 8;
  os << "<line x1=\"60\" y1=\"" << fmt(ly) << "\" x2=\"90\" y2=\"" << fmt(ly)
     << "\" stroke=\"#1f5fa8\" stroke-width=\"2\"/>\n"
     << "<text x=\"95\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">weighted</text>\n"
     << "<line x1=\"170\" y1=\"" << fmt(ly) << "\" x2=\"200\" y2=\"" << fmt(ly)
     << "\" stroke=\"#c0392b\" stroke-width=\"2\" stroke-dasharray=\"6,3\"/>\n"
     << "<text x=\"205\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">unweighted</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace svytree::cli
