#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mixlab::cli {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw std::logic_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::render(const std::vector<std::string>& preamble) const {
  std::string out;
  auto join = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  for (const auto& line : preamble) out += "# " + line + '\n';
  join(header_);
  for (const auto& row : rows_) join(row);
  return out;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Chart& chart) {
  constexpr double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!chart.xs.empty()) {
    x0 = *std::min_element(chart.xs.begin(), chart.xs.end());
    x1 = *std::max_element(chart.xs.begin(), chart.xs.end());
  }
  std::vector<double> ys;
  for (double y : chart.ys)
    if (std::isfinite(y)) ys.push_back(y);
  for (const auto& r : chart.references) ys.push_back(r.y);
  if (!ys.empty()) {
    y0 = std::min(0.0, *std::min_element(ys.begin(), ys.end()));
    y1 = *std::max_element(ys.begin(), ys.end());
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(chart.title) << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    s << "<text x=\"" << sx(fx) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << num(fx) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">"
      << num(fy) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
    << escape(chart.x_label) << "</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">" << escape(chart.y_label) << "</text>\n";

  for (const auto& r : chart.references) {
    s << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(r.y) << "\" y2=\""
      << sy(r.y) << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
    s << "<text x=\"" << left + pw - 4 << "\" y=\"" << sy(r.y) - 4
      << "\" text-anchor=\"end\" fill=\"gray\">" << escape(r.label) << "</text>\n";
  }

  s << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < chart.xs.size() && i < chart.ys.size(); ++i)
    if (std::isfinite(chart.ys[i])) s << sx(chart.xs[i]) << ',' << sy(chart.ys[i]) << ' ';
  s << "\"/>\n</svg>\n";
  return s.str();
}

}  // namespace mixlab::cli
