// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dggen/event_store.hpp"

namespace dggen {

// Planted-structure bipartite stream used as a desk-scale oracle: every
// source prefers one destination block, the categorical feature's pmf is
// tied to the block's parity, the numerical feature is a two-component
// Gaussian mixture, and inter-event times are i.i.d. Exponential.
struct ToyConfig {
  int n_src_nodes = 20;
  int n_dst_nodes = 30;
  int n_dst_blocks = 3;
  long long n_events = 20000;
  double rate = 1.0;          // Exponential inter-event rate
  double prefer_prob = 0.9;   // mass a source puts on its preferred block
  std::vector<double> cat_pmf_even = {0.7, 0.3};  // even destination blocks
  std::vector<double> cat_pmf_odd = {0.2, 0.8};   // odd destination blocks
  std::vector<double> gmm_means = {-2.0, 2.0};
  std::vector<double> gmm_stds = {0.5, 0.5};
  std::vector<double> gmm_weights = {0.5, 0.5};
  std::uint64_t seed = 0;

  void validate() const;
};

// The schema every toy stream carries: one categorical feature with the
// pmf's cardinality and one numerical feature.
FeatureSchema toy_schema(const ToyConfig& config);

EventStream make_toy(const ToyConfig& config);

}  // namespace dggen
