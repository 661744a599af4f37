#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "passnet/sim.hpp"

namespace passnet {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

/// CSV schema: one row per recorded sample, columns
///   t, x_1.., y_1.., u_1.., zeta_1.., mu_1.., disagreement_norm
/// where x spans the full stacked state. Values carry 12 significant
/// digits.
inline void emit_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  if (traj.empty()) throw std::invalid_argument("emit_trajectory_csv: empty trajectory");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  const std::size_t dim = traj.states.front().size();
  const std::size_t n = traj.frames.front().y.size();
  const std::size_t m = traj.frames.front().zeta.size();

  out << 't';
  for (std::size_t i = 1; i <= dim; ++i) out << ",x_" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",y_" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",u_" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",zeta_" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",mu_" << i;
  out << ",disagreement_norm\n";

  const auto dis = disagreement_series(traj);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    out << detail::sig12(traj.times[s]);
    for (double v : traj.states[s]) out << ',' << detail::sig12(v);
    for (double v : traj.frames[s].y) out << ',' << detail::sig12(v);
    for (double v : traj.frames[s].u) out << ',' << detail::sig12(v);
    for (double v : traj.frames[s].zeta) out << ',' << detail::sig12(v);
    for (double v : traj.frames[s].mu) out << ',' << detail::sig12(v);
    out << ',' << detail::sig12(dis[s].second) << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j] != name) continue;
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& r : rows) out.push_back(r[j]);
      return out;
    }
    throw std::invalid_argument("CsvTable: no column named " + name);
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV " + path.string());
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size())
      throw IoError("ragged CSV row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace detail {

inline std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace detail

/// Dependency-free SVG plot: one polyline per agent output against time,
/// with axes, tick labels and a legend. Byte-deterministic for a fixed
/// trajectory.
inline void emit_plot_svg(const Trajectory& traj, const std::filesystem::path& path,
                          const std::string& title) {
  if (traj.empty()) throw std::invalid_argument("emit_plot_svg: empty trajectory");
  const std::size_t n = traj.frames.front().y.size();

  double y_min = traj.frames.front().y.front(), y_max = y_min;
  for (const auto& f : traj.frames)
    for (double v : f.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  if (y_max - y_min < 1e-12) {
    y_min -= 1.0;
    y_max += 1.0;
  } else {
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
  }
  const double t0 = traj.times.front(), t1 = traj.times.back();

  const double px0 = 70, px1 = 820, py0 = 470, py1 = 50;  // y axis grows upward
  auto sx = [&](double t) { return px0 + (t - t0) / (t1 - t0) * (px1 - px0); };
  auto sy = [&](double v) { return py0 + (v - y_min) / (y_max - y_min) * (py1 - py0); };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"520\" "
         "viewBox=\"0 0 880 520\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"880\" height=\"520\" fill=\"white\"/>\n";
  out << "<text x=\"440\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" << title << "</text>\n";
  out << "<rect x=\"" << detail::coord(px0) << "\" y=\"" << detail::coord(py1) << "\" width=\""
      << detail::coord(px1 - px0) << "\" height=\"" << detail::coord(py0 - py1)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double t = t0 + (t1 - t0) * k / 5.0;
    const double v = y_min + (y_max - y_min) * k / 5.0;
    char label[32];
    out << "<line x1=\"" << detail::coord(sx(t)) << "\" y1=\"" << detail::coord(py0)
        << "\" x2=\"" << detail::coord(sx(t)) << "\" y2=\"" << detail::coord(py0 + 5)
        << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof(label), "%.3g", t);
    out << "<text x=\"" << detail::coord(sx(t)) << "\" y=\"" << detail::coord(py0 + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label
        << "</text>\n";
    out << "<line x1=\"" << detail::coord(px0 - 5) << "\" y1=\"" << detail::coord(sy(v))
        << "\" x2=\"" << detail::coord(px0) << "\" y2=\"" << detail::coord(sy(v))
        << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof(label), "%.3g", v);
    out << "<text x=\"" << detail::coord(px0 - 8) << "\" y=\"" << detail::coord(sy(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
        << "</text>\n";
  }
  out << "<text x=\"" << detail::coord(0.5 * (px0 + px1)) << "\" y=\"508\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">t</text>\n";
  out << "<text x=\"18\" y=\"" << detail::coord(0.5 * (py0 + py1)) << "\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">y</text>\n";

  for (std::size_t i = 0; i < n; ++i) {
    const char* color = detail::kPalette[i % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t s = 0; s < traj.size(); ++s) {
      if (s) out << ' ';
      out << detail::coord(sx(traj.times[s])) << ',' << detail::coord(sy(traj.frames[s].y[i]));
    }
    out << "\"/>\n";
    const double ly = py1 + 16.0 + 16.0 * static_cast<double>(i);
    out << "<line x1=\"" << detail::coord(px1 - 60) << "\" y1=\"" << detail::coord(ly - 4)
        << "\" x2=\"" << detail::coord(px1 - 40) << "\" y2=\"" << detail::coord(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << detail::coord(px1 - 34) << "\" y=\"" << detail::coord(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">y" << (i + 1) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace passnet
