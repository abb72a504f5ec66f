// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dggen/event_store.hpp"
#include "dggen/model.hpp"
#include "dggen/tape.hpp"

namespace dggen {

struct NeighborEntry {
  int peer = 0;
  double t = 0.0;
  std::vector<double> features;
};

// Per-node encoder state.  Fresh state is zero memory, last_update at the
// stream origin, and no neighbors.
struct NodeState {
  Eigen::VectorXd memory;
  double last_update = 0.0;
  std::vector<NeighborEntry> neighbors;  // time-ordered, oldest first, capped
};

class NodeStates {
 public:
  NodeStates() = default;
  NodeStates(int num_nodes, int d_mem, double origin_time);
  void reset(double origin_time);

  int size() const { return static_cast<int>(states_.size()); }
  NodeState& operator[](int node) { return states_[node]; }
  const NodeState& operator[](int node) const { return states_[node]; }

  // Order-sensitive digest of all state content; used to verify that
  // read-only operations really are read-only.
  std::uint64_t content_hash() const;

 private:
  std::vector<NodeState> states_;
};

// The min(k, available) neighbors seen strictly before at_time, most recent
// first; ties broken by insertion order (later insertion = more recent).
std::vector<const NeighborEntry*> recent_neighbors(const NodeState& state,
                                                   double at_time, int k);

// Time encoding cos(omega * delta + phi) evaluated from stored parameters.
Eigen::VectorXd time_encode_value(const Model& model, double delta);

// Tape nodes produced by one differentiable memory advance.
struct AdvanceVars {
  std::vector<int> touched;  // node ids aligned with h_new columns
  ad::Var h_new;             // [d_mem x touched]; invalid when batch empty
};

// Applies one batch to the node states: builds each touched node's most
// recent message, runs the recurrent memory update on the tape, then commits
// the new memory values, last_update times, and neighbor-list appends.
// Gradients flow into the weights through the returned tape nodes; the
// consumed memories enter as constants (cross-batch detachment).
// Throws when a batch timestamp precedes a touched node's last_update.
AdvanceVars advance_states(ad::Tape& tape, const Model& model,
                           const ModelRefs& refs, NodeStates& states,
                           std::span<const Interaction> batch);

// Concrete (values-only) form of advance_states.
void update_memory(const Model& model, NodeStates& states,
                   std::span<const Interaction> batch);

// Batched temporal embedding of `nodes` at one shared time: multi-head
// attention over each node's recent neighbors (memory + time encoding +
// edge features as keys/values, own memory + zero-delta encoding as query)
// followed by a feed-forward projection to d_emb.  A node without neighbors
// — and every node when attention is disabled — contributes a zero
// attention block, leaving the projection of its own memory.  When adv is
// non-null, touched nodes read their memory from the tape (differentiable);
// everything else enters as constants.  Returns [d_emb x nodes].
ad::Var embed_nodes(ad::Tape& tape, const Model& model, const ModelRefs& refs,
                    const NodeStates& states, const AdvanceVars* adv,
                    const std::vector<int>& nodes, double at_time);

// Value-only convenience wrapper over embed_nodes.
std::vector<Eigen::VectorXd> embed_values(const Model& model,
                                          const NodeStates& states,
                                          const std::vector<int>& nodes,
                                          double at_time);

}  // namespace dggen
