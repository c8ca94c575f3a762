#pragma once

#include <string>
#include <vector>

namespace mixlab::cli {

/// Fixed 9-significant-digit formatting used for every numeric CSV cell.
std::string num(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }

  /// `#`-prefixed preamble lines, the header, then the rows; LF endings.
  std::string render(const std::vector<std::string>& preamble) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct ChartLine {
  std::string label;
  double y = 0.0;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> xs;
  std::vector<double> ys;
  /// Dashed horizontal reference levels.
  std::vector<ChartLine> references;
};

/// Standalone SVG line chart.
std::string render_svg(const Chart& chart);

}  // namespace mixlab::cli
