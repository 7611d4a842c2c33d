/*
 * Copyright 2026 The gnoc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GNOC_SVG_PLOT_HPP_
#define GNOC_SVG_PLOT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gnoc/errors.hpp"

// Minimal SVG line charts, enough to render run outputs without external
// tooling.  One chart = several named series on shared axes; the y axis
// can be log10 for decay curves.
namespace gnoc {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  int width = 860;
  int height = 520;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;       // plot log10(|y|); non-positive points dropped
  int max_legend = 12;      // legend rows before the rest is summarized
};

namespace detail_plot {

inline std::string short_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const double a = std::abs(v);
  if (a >= 1e-3 && a < 1e5) {
    std::snprintf(buf, sizeof(buf), "%.4g", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.2e", v);
  }
  return buf;
}

inline const char* palette(int k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                 "#bcbd22", "#17becf"};
  return colors[k % 10];
}

}  // namespace detail_plot

inline std::string render_line_plot(const std::vector<PlotSeries>& series,
                                    const PlotOptions& opt = {}) {
  using detail_plot::short_number;
  if (series.empty()) throw ConfigError("plot: no series to draw");

  // Transform into plot space and find the data window.
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  for (size_t s = 0; s < series.size(); ++s) {
    if (series[s].x.size() != series[s].y.size()) {
      throw ShapeError("plot: series '" + series[s].label +
                       "' has mismatched x/y lengths");
    }
    for (size_t k = 0; k < series[s].x.size(); ++k) {
      double px = series[s].x[k];
      double py = series[s].y[k];
      if (!std::isfinite(px) || !std::isfinite(py)) continue;
      if (opt.log_y) {
        if (py <= 0.0) continue;
        py = std::log10(py);
      }
      pts[s].emplace_back(px, py);
      xmin = std::min(xmin, px);
      xmax = std::max(xmax, px);
      ymin = std::min(ymin, py);
      ymax = std::max(ymax, py);
    }
  }
  if (!(xmin <= xmax)) throw ConfigError("plot: no drawable points");
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double left = 78, right = 24, top = opt.title.empty() ? 24 : 46;
  const double bottom = 56;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;
  auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) {
    return top + (ymax - v) / (ymax - ymin) * ph;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
      << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width
      << ' ' << opt.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!opt.title.empty()) {
    svg << "<text x=\"" << opt.width / 2.0
        << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << opt.title
        << "</text>\n";
  }

  // Gridlines and ticks.
  const int nticks = 6;
  for (int k = 0; k < nticks; ++k) {
    const double fx = xmin + (xmax - xmin) * k / (nticks - 1);
    const double gx = sx(fx);
    svg << "<line x1=\"" << gx << "\" y1=\"" << top << "\" x2=\"" << gx
        << "\" y2=\"" << top + ph << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << gx << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">" << short_number(fx) << "</text>\n";
  }
  for (int k = 0; k < nticks; ++k) {
    const double fy = ymin + (ymax - ymin) * k / (nticks - 1);
    const double gy = sy(fy);
    svg << "<line x1=\"" << left << "\" y1=\"" << gy << "\" x2=\""
        << left + pw << "\" y2=\"" << gy << "\" stroke=\"#e0e0e0\"/>\n";
    const std::string label =
        opt.log_y ? ("1e" + short_number(fy)) : short_number(fy);
    svg << "<text x=\"" << left - 8 << "\" y=\"" << gy + 4
        << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#404040\"/>\n";

  // Axis labels.
  if (!opt.x_label.empty()) {
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 12
        << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n";
  }
  if (!opt.y_label.empty()) {
    svg << "<text x=\"18\" y=\"" << top + ph / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << top + ph / 2 << ")\">" << opt.y_label << "</text>\n";
  }

  // Series.
  for (size_t s = 0; s < series.size(); ++s) {
    if (pts[s].empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\""
        << detail_plot::palette(static_cast<int>(s))
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [px, py] : pts[s]) {
      svg << sx(px) << ',' << sy(py) << ' ';
    }
    svg << "\"/>\n";
  }

  // Legend, top-right inside the frame.
  const int shown =
      std::min<int>(static_cast<int>(series.size()), opt.max_legend);
  for (int s = 0; s < shown; ++s) {
    const double ly = top + 16 + 16.0 * s;
    svg << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << ly << "\" x2=\""
        << left + pw - 128 << "\" y2=\"" << ly << "\" stroke=\""
        << detail_plot::palette(s) << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw - 122 << "\" y=\"" << ly + 4 << "\">"
        << series[s].label << "</text>\n";
  }
  if (static_cast<int>(series.size()) > shown) {
    const double ly = top + 16 + 16.0 * shown;
    svg << "<text x=\"" << left + pw - 150 << "\" y=\"" << ly + 4 << "\">+"
        << series.size() - shown << " more</text>\n";
  }

  svg << "</g>\n</svg>\n";
  return svg.str();
}

inline void write_line_plot(const std::string& path,
                            const std::vector<PlotSeries>& series,
                            const PlotOptions& opt = {}) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << render_line_plot(series, opt);
}

}  // namespace gnoc

#endif  // GNOC_SVG_PLOT_HPP_
