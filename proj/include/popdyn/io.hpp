#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace popdyn {

/// Numeric table with named columns; rows are stored row-major.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::vector<double> column(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
};

/// Build a table from equal-length columns.
Table table_from_columns(std::vector<std::string> names, const std::vector<std::vector<double>>& columns);

/// Round-trip precision (%.17g) so reruns are byte-identical.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

struct PlotStyle {
  std::string title;
  /// Column used for the horizontal axis; empty selects the first column.
  std::string x;
  /// Curves to draw; empty draws every other column.
  std::vector<std::string> y;
  std::string x_label;
  std::string y_label;
  bool zero_line = false;
  /// Draw the first curve as bars (histograms).
  bool first_as_steps = false;
};

/// Self-contained SVG line plot. Throws "no rows" for an empty table and
/// "schema mismatch" when a requested column is missing.
std::string render_svg(const Table& table, const PlotStyle& style);
/// Reads a CSV artifact and writes its SVG rendering.
void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg, const PlotStyle& style);

}  // namespace popdyn
