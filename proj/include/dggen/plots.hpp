// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dggen/evaluation.hpp"

namespace dggen {

// Overlaid normalized bar chart of two 1D histograms with shared binning.
void write_histogram_svg(const Histogram& real, const Histogram& synth,
                         const std::string& title, const std::string& path);

// Symmetric feature-pair heat map of Jensen-Shannon distances: js(i,i) is a
// feature's 1D distance, js(i,j) a pair's 2D distance.  Values lie in [0,1].
void write_js_heatmap_svg(const Eigen::MatrixXd& js,
                          const std::vector<std::string>& names,
                          const std::string& path);

}  // namespace dggen
