// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dggen/decoder.hpp"
#include "dggen/encoder.hpp"
#include "dggen/event_store.hpp"
#include "dggen/model.hpp"
#include "dggen/rng.hpp"

namespace dggen {

struct GenerationConfig {
  long long num_interactions = 0;
  int batch_size = 100;
  int node_pool_size = 0;  // pool of fresh node ids 0..pool-1
  std::uint64_t seed = 0;

  void validate() const;
};

struct GenerationStats {
  long long destination_resamples = 0;  // extra draws after self-loops
  long long self_loop_skips = 0;        // pairs dropped after 10 resamples
};

// Synthesizes a stream from scratch: a fresh node pool with zero memory at
// time 0; each round embeds the pool, samples sources, destinations (self
// loops re-sampled up to 10 times, then skipped), then (delta, features)
// autoregressively per pair; the batch's deltas are sorted ascending and
// cumulative-summed onto the clock before the memory is updated with the
// new interactions.  Deterministic for a fixed seed.
EventStream generate(const Model& model, const GenerationConfig& config,
                     GenerationStats* stats = nullptr);

struct LinkQuery {
  int src = 0;
  int dst = 0;
  double t = 0.0;
};

// Destination-scorer value for each (src, dst, t) against the given frozen
// encoder state; never mutates the state.  Higher = more likely partner.
std::vector<double> score_links(const Model& model, const NodeStates& states,
                                const std::vector<LinkQuery>& queries);

}  // namespace dggen
