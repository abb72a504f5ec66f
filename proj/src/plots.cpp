// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dggen {

namespace {

constexpr const char* kRealColor = "#4878a8";
constexpr const char* kSynthColor = "#e07840";

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("plot error: cannot open " + path);
  os << body;
  if (!os.good()) throw std::runtime_error("plot error: write failed for " + path);
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

}  // namespace

void write_histogram_svg(const Histogram& real, const Histogram& synth,
                         const std::string& title, const std::string& path) {
  if (real.is_2d() || synth.is_2d())
    throw std::invalid_argument("histogram plot: 1D histograms only");
  if (real.x_edges != synth.x_edges)
    throw std::invalid_argument("histogram plot: binning mismatch");

  const Eigen::MatrixXd p = real.pmf();
  const Eigen::MatrixXd q = synth.pmf();
  const int bins = static_cast<int>(p.rows());
  const double peak = std::max(p.maxCoeff(), q.maxCoeff());

  const double width = 640.0, height = 360.0;
  const double left = 50.0, right = 20.0, top = 40.0, bottom = 40.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double bar_w = plot_w / bins;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << escape_xml(title) << "</text>\n";

  auto bars = [&](const Eigen::MatrixXd& pmf, const char* color) {
    for (int i = 0; i < bins; ++i) {
      const double h = peak > 0.0 ? pmf(i, 0) / peak * plot_h : 0.0;
      if (h <= 0.0) continue;
      svg << "<rect x=\"" << left + i * bar_w << "\" y=\"" << top + plot_h - h
          << "\" width=\"" << bar_w << "\" height=\"" << h << "\" fill=\""
          << color << "\" fill-opacity=\"0.55\"/>\n";
    }
  };
  bars(p, kRealColor);
  bars(q, kSynthColor);

  // Axis line, range labels, and the two-entry legend.
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"#404040\"/>\n"
      << "<text x=\"" << left << "\" y=\"" << height - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << format_number(real.x_edges.front()) << "</text>\n"
      << "<text x=\"" << left + plot_w << "\" y=\"" << height - 12
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
      << format_number(real.x_edges.back()) << "</text>\n"
      << "<rect x=\"" << left + 8 << "\" y=\"" << top + 4
      << "\" width=\"12\" height=\"12\" fill=\"" << kRealColor
      << "\" fill-opacity=\"0.55\"/>\n"
      << "<text x=\"" << left + 24 << "\" y=\"" << top + 14
      << "\" font-family=\"sans-serif\" font-size=\"12\">reference</text>\n"
      << "<rect x=\"" << left + 100 << "\" y=\"" << top + 4
      << "\" width=\"12\" height=\"12\" fill=\"" << kSynthColor
      << "\" fill-opacity=\"0.55\"/>\n"
      << "<text x=\"" << left + 116 << "\" y=\"" << top + 14
      << "\" font-family=\"sans-serif\" font-size=\"12\">generated</text>\n"
      << "</svg>\n";
  write_file(path, svg.str());
}

void write_js_heatmap_svg(const Eigen::MatrixXd& js,
                          const std::vector<std::string>& names,
                          const std::string& path) {
  const int n = static_cast<int>(js.rows());
  if (js.cols() != n || static_cast<int>(names.size()) != n)
    throw std::invalid_argument("heat map: square matrix and matching names required");

  const double cell = 72.0, label = 90.0, top = 40.0;
  const double width = label + n * cell + 20.0;
  const double height = top + label + n * cell + 20.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
         "Jensen-Shannon distance by feature pair</text>\n";

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = std::clamp(js(i, j), 0.0, 1.0);
      // White at 0 toward a deep red at 1.
      const int r = 255;
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - 0.85 * v)));
      const int b = static_cast<int>(std::lround(255.0 * (1.0 - 0.95 * v)));
      const double x = label + j * cell;
      const double y = top + label + i * cell;
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << r << "," << g << ","
          << b << ")\" stroke=\"#808080\"/>\n"
          << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"13\">"
          << format_number(v) << "</text>\n";
    }
  }
  for (int i = 0; i < n; ++i) {
    svg << "<text x=\"" << label - 8 << "\" y=\""
        << top + label + i * cell + cell / 2 + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape_xml(names[i]) << "</text>\n"
        << "<text x=\"" << label + i * cell + cell / 2 << "\" y=\""
        << top + label - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">"
        << escape_xml(names[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  write_file(path, svg.str());
}

}  // namespace dggen
