#pragma once

#include <wavelab/types.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace wavelab {

using Json = nlohmann::json;  // object keys iterate sorted (std::map storage)

/// Full round-trip double formatting (17 significant digits).
inline std::string format_full(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_short(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Scalar>> rows;

  Index column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return Index(i);
    throw std::runtime_error("csv: no column named '" + name + "'");
  }
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::runtime_error("csv: row width does not match the header");
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_full(row[i]);
    out << "\n";
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (!s.empty() && s.back() == ',') parts.push_back("");
    return parts;
  };
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<Scalar> row;
    for (const std::string& cell : split(line)) {
      size_t pos = 0;
      Scalar v;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("csv: non-numeric cell '" + cell + "' at line " +
                                 std::to_string(lineno));
      }
      if (pos != cell.size())
        throw std::runtime_error("csv: trailing characters in cell '" + cell + "' at line " +
                                 std::to_string(lineno));
      row.push_back(v);
    }
    if (row.size() != table.header.size())
      throw std::runtime_error("csv: row width mismatch at line " + std::to_string(lineno));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("json parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

struct PlotSeries {
  std::string label;
  std::vector<Scalar> x, y;  // only positive entries are drawn (log-log axes)
};

struct GuideLine {
  std::string label;
  Scalar slope = 0;          // log-log slope
  Scalar x_ref = 1, y_ref = 1;  // anchor point
};

/// Deterministic log-log SVG: decade grid, one polyline per series, dashed
/// guide lines. Returns false (no file) when no series has >= 2 positive points.
inline bool write_loglog_svg(const std::filesystem::path& path, const std::string& title,
                             const std::vector<PlotSeries>& series,
                             const std::vector<GuideLine>& guides) {
  Scalar lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  size_t usable = 0;
  for (const PlotSeries& s : series) {
    size_t pts = 0;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0)) continue;
      ++pts;
      lx_min = std::min(lx_min, std::log10(s.x[i]));
      lx_max = std::max(lx_max, std::log10(s.x[i]));
      ly_min = std::min(ly_min, std::log10(s.y[i]));
      ly_max = std::max(ly_max, std::log10(s.y[i]));
    }
    if (pts >= 2) ++usable;
  }
  if (usable == 0) return false;
  if (lx_max - lx_min < 1e-9) lx_max = lx_min + 1;
  if (ly_max - ly_min < 1e-9) ly_max = ly_min + 1;

  const Scalar W = 800, H = 600, ml = 70, mr = 20, mt = 40, mb = 50;
  auto X = [&](Scalar lx) { return ml + (lx - lx_min) / (lx_max - lx_min) * (W - ml - mr); };
  auto Y = [&](Scalar ly) { return H - mb - (ly - ly_min) / (ly_max - ly_min) * (H - mt - mb); };
  const char* palette[6] = {"#1b6ca8", "#c44536", "#2a9d3f", "#7b4fa6", "#c98a1b", "#3a3a3a"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"16\">"
      << title << "</text>\n";
  for (long d = (long)std::ceil(lx_min); d <= (long)std::floor(lx_max); ++d) {
    svg << "<line x1=\"" << format_short(X(Scalar(d))) << "\" y1=\"" << Y(ly_min) << "\" x2=\""
        << format_short(X(Scalar(d))) << "\" y2=\"" << Y(ly_max)
        << "\" stroke=\"#dddddd\"/>\n<text x=\"" << format_short(X(Scalar(d))) << "\" y=\""
        << H - mb + 18 << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">1e"
        << d << "</text>\n";
  }
  for (long d = (long)std::ceil(ly_min); d <= (long)std::floor(ly_max); ++d) {
    svg << "<line x1=\"" << X(lx_min) << "\" y1=\"" << format_short(Y(Scalar(d))) << "\" x2=\""
        << X(lx_max) << "\" y2=\"" << format_short(Y(Scalar(d)))
        << "\" stroke=\"#dddddd\"/>\n<text x=\"" << ml - 6 << "\" y=\""
        << format_short(Y(Scalar(d)) + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">1e" << d
        << "</text>\n";
  }
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  int color = 0, legend_y = int(mt) + 16;
  for (const GuideLine& gl : guides) {
    const Scalar y0 = std::log10(gl.y_ref) + gl.slope * (lx_min - std::log10(gl.x_ref));
    const Scalar y1 = std::log10(gl.y_ref) + gl.slope * (lx_max - std::log10(gl.x_ref));
    svg << "<line x1=\"" << format_short(X(lx_min)) << "\" y1=\"" << format_short(Y(y0))
        << "\" x2=\"" << format_short(X(lx_max)) << "\" y2=\"" << format_short(Y(y1))
        << "\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<text x=\"" << W - mr - 8 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" fill=\"#888888\">"
        << gl.label << "</text>\n";
    legend_y += 16;
  }
  for (const PlotSeries& s : series) {
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0)) continue;
      pts << format_short(X(std::log10(s.x[i]))) << "," << format_short(Y(std::log10(s.y[i])))
          << " ";
    }
    const std::string color_s = palette[color % 6];
    svg << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color_s
        << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << W - mr - 8 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" fill=\"" << color_s
        << "\">" << s.label << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << svg.str();
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
  return true;
}

}  // namespace wavelab
