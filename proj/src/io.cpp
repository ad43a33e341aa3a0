#include "popdyn/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace popdyn {

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t Table::index_of(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::invalid_argument("schema mismatch: no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t j = index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

Table table_from_columns(std::vector<std::string> names, const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw std::invalid_argument("column count mismatch");
  Table t;
  t.columns = std::move(names);
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw std::invalid_argument("columns differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (const auto& c : columns) row.push_back(c[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::string s;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) s += ',';
    s += table.columns[j];
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) s += ',';
      s += fmt::format("{:.17g}", row[j]);
    }
    s += '\n';
  }
  write_text(path, s);
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("no rows");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("schema mismatch: non-numeric cell '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size()) throw std::runtime_error("schema mismatch: ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Table& table, const PlotStyle& style) {
  if (table.rows.empty()) throw std::runtime_error("no rows");
  const std::string xname = style.x.empty() ? table.columns.front() : style.x;
  const std::size_t xi = table.index_of(xname);
  std::vector<std::size_t> ys;
  if (style.y.empty()) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j != xi) ys.push_back(j);
    }
  } else {
    for (const auto& name : style.y) ys.push_back(table.index_of(name));
  }
  if (ys.empty()) throw std::runtime_error("schema mismatch: nothing to plot");

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& row : table.rows) {
    if (!std::isfinite(row[xi])) continue;
    x0 = std::min(x0, row[xi]);
    x1 = std::max(x1, row[xi]);
    for (std::size_t j : ys) {
      if (!std::isfinite(row[j])) continue;
      y0 = std::min(y0, row[j]);
      y1 = std::max(y1, row[j]);
    }
  }
  if (style.zero_line) {
    y0 = std::min(y0, 0.0);
    y1 = std::max(y1, 0.0);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight, kWidth, kHeight);
  s += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                   kWidth / 2, escape(style.title));
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                   kTop, pw, ph);
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
                     "text-anchor=\"middle\">{:.3g}</text>\n",
                     px(xv), kTop + ph + 16, xv);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
                     "text-anchor=\"end\">{:.3g}</text>\n",
                     kLeft - 6, py(yv) + 4, yv);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                   kLeft + pw / 2, kHeight - 10, escape(style.x_label.empty() ? xname : style.x_label));
  s += fmt::format("<text x=\"14\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                   "transform=\"rotate(-90 14 {})\">{}</text>\n",
                   kTop + ph / 2, kTop + ph / 2, escape(style.y_label));
  if (style.zero_line) {
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\" "
                     "stroke-dasharray=\"4 3\"/>\n",
                     kLeft, py(0.0), kLeft + pw, py(0.0));
  }
  for (std::size_t c = 0; c < ys.size(); ++c) {
    const std::size_t j = ys[c];
    const char* colour = kPalette[c % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      if (!std::isfinite(row[xi]) || !std::isfinite(row[j])) continue;
      if (style.first_as_steps && c == 0 && i + 1 < table.rows.size()) {
        pts += fmt::format("{:.2f},{:.2f} {:.2f},{:.2f} ", px(row[xi]), py(row[j]), px(table.rows[i + 1][xi]),
                           py(row[j]));
      } else {
        pts += fmt::format("{:.2f},{:.2f} ", px(row[xi]), py(row[j]));
      }
    }
    s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, pts);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}</text>\n",
                     kLeft + pw - 110, kTop + 14 + 13.0 * static_cast<double>(c % 20), colour,
                     escape(table.columns[j]));
  }
  s += "</svg>\n";
  return s;
}

void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg, const PlotStyle& style) {
  write_text(svg, render_svg(read_csv(csv), style));
}

}  // namespace popdyn
