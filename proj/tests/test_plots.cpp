// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/plots.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dggen/evaluation.hpp"

namespace dggen {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

Histogram hist_1d(const std::vector<double>& counts) {
  Histogram h;
  h.x_edges = uniform_edges(0.0, 1.0, static_cast<int>(counts.size()));
  h.counts = Eigen::MatrixXd(counts.size(), 1);
  for (size_t i = 0; i < counts.size(); ++i) h.counts(static_cast<int>(i), 0) = counts[i];
  return h;
}

TEST(HistogramPlotTest, WritesWellFormedSvg) {
  const std::string path = testing::TempDir() + "hist.svg";
  write_histogram_svg(hist_1d({3, 1, 6, 2}), hist_1d({2, 2, 5, 3}),
                      "feature f1", path);

  const std::string svg = slurp(path);
  ASSERT_FALSE(svg.empty());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("feature f1"), std::string::npos);
}

TEST(HistogramPlotTest, RejectsTwoDimensionalInput) {
  Histogram h2 = hist_1d({1, 2});
  h2.y_edges = uniform_edges(0.0, 1.0, 2);
  h2.counts = Eigen::MatrixXd::Ones(2, 2);
  const std::string path = testing::TempDir() + "never_written.svg";
  EXPECT_THROW(write_histogram_svg(h2, hist_1d({1, 2}), "t", path),
               std::invalid_argument);
  EXPECT_THROW(write_histogram_svg(hist_1d({1, 2}), h2, "t", path),
               std::invalid_argument);
}

TEST(HistogramPlotTest, RejectsMismatchedBinning) {
  const std::string path = testing::TempDir() + "never_written.svg";
  EXPECT_THROW(
      write_histogram_svg(hist_1d({1, 2, 3}), hist_1d({1, 2}), "t", path),
      std::invalid_argument);
}

TEST(HistogramPlotTest, UnwritablePathThrows) {
  EXPECT_THROW(write_histogram_svg(hist_1d({1, 2}), hist_1d({1, 2}), "t",
                                   "/no_such_dir/deep/hist.svg"),
               std::runtime_error);
}

TEST(JsHeatmapPlotTest, WritesNamesIntoTheSvg) {
  Eigen::MatrixXd js(2, 2);
  js << 0.1, 0.4, 0.4, 0.2;
  const std::string path = testing::TempDir() + "heat.svg";
  write_js_heatmap_svg(js, {"alpha_feat", "beta_feat"}, path);

  const std::string svg = slurp(path);
  ASSERT_FALSE(svg.empty());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("alpha_feat"), std::string::npos);
  EXPECT_NE(svg.find("beta_feat"), std::string::npos);
}

TEST(JsHeatmapPlotTest, RejectsBadShapes) {
  const std::string path = testing::TempDir() + "never_written.svg";
  EXPECT_THROW(
      write_js_heatmap_svg(Eigen::MatrixXd::Zero(2, 3), {"a", "b"}, path),
      std::invalid_argument);
  EXPECT_THROW(
      write_js_heatmap_svg(Eigen::MatrixXd::Zero(2, 2), {"a"}, path),
      std::invalid_argument);
}

TEST(JsHeatmapPlotTest, UnwritablePathThrows) {
  EXPECT_THROW(write_js_heatmap_svg(Eigen::MatrixXd::Zero(1, 1), {"a"},
                                    "/no_such_dir/deep/heat.svg"),
               std::runtime_error);
}

}  // namespace
}  // namespace dggen
