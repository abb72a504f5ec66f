// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/encoder.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace dggen {

namespace {

// FNV-1a over raw bytes; stable within a run, used only for purity checks.
std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return hash_bytes(h, &bits, sizeof(bits));
}

// Time encoding row for a batch of deltas: cos(omega * d + phi), [d_time x K].
ad::Var time_encode_row(ad::Tape& t, const ModelRefs& refs,
                        const std::vector<double>& deltas) {
  ad::Mat row(1, static_cast<Eigen::Index>(deltas.size()));
  for (std::size_t i = 0; i < deltas.size(); ++i) row(0, i) = deltas[i];
  return t.cos_(t.add_col(t.matmul(refs.time_omega, t.constant(row)), refs.time_phi));
}

// Memory columns for a node list, reading touched nodes from the tape and
// the rest from stored state.  Keeps the tape small by grouping: one gather
// over h_new, one constant block, then a column permutation.
ad::Var gathered_memory(ad::Tape& t, const NodeStates& states,
                        const AdvanceVars* adv, const std::vector<int>& nodes,
                        int d_mem) {
  std::unordered_map<int, int> touch_col;
  if (adv && adv->h_new.valid())
    for (std::size_t i = 0; i < adv->touched.size(); ++i)
      touch_col.emplace(adv->touched[i], static_cast<int>(i));

  std::vector<int> var_cols, var_slots, const_slots;
  for (std::size_t slot = 0; slot < nodes.size(); ++slot) {
    auto it = touch_col.find(nodes[slot]);
    if (it != touch_col.end()) {
      var_cols.push_back(it->second);
      var_slots.push_back(static_cast<int>(slot));
    } else {
      const_slots.push_back(static_cast<int>(slot));
    }
  }

  if (var_slots.empty()) {
    ad::Mat block(d_mem, static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
      block.col(static_cast<Eigen::Index>(i)) = states[nodes[i]].memory;
    return t.constant(std::move(block));
  }
  const ad::Var from_tape = t.gather_cols(adv->h_new, var_cols);
  if (const_slots.empty()) return from_tape;

  ad::Mat block(d_mem, static_cast<Eigen::Index>(const_slots.size()));
  for (std::size_t i = 0; i < const_slots.size(); ++i)
    block.col(static_cast<Eigen::Index>(i)) = states[nodes[const_slots[i]]].memory;
  const ad::Var joined = t.hcat({from_tape, t.constant(std::move(block))});

  std::vector<int> perm(nodes.size());
  for (std::size_t i = 0; i < var_slots.size(); ++i)
    perm[var_slots[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < const_slots.size(); ++i)
    perm[const_slots[i]] = static_cast<int>(var_slots.size() + i);
  return t.gather_cols(joined, perm);
}

}  // namespace

NodeStates::NodeStates(int num_nodes, int d_mem, double origin_time) {
  states_.resize(num_nodes);
  for (NodeState& s : states_) s.memory = Eigen::VectorXd::Zero(d_mem);
  reset(origin_time);
}

void NodeStates::reset(double origin_time) {
  for (NodeState& s : states_) {
    s.memory.setZero();
    s.last_update = origin_time;
    s.neighbors.clear();
  }
}

std::uint64_t NodeStates::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const NodeState& s : states_) {
    for (Eigen::Index i = 0; i < s.memory.size(); ++i) h = hash_double(h, s.memory(i));
    h = hash_double(h, s.last_update);
    for (const NeighborEntry& n : s.neighbors) {
      h = hash_bytes(h, &n.peer, sizeof(n.peer));
      h = hash_double(h, n.t);
      for (double f : n.features) h = hash_double(h, f);
    }
  }
  return h;
}

std::vector<const NeighborEntry*> recent_neighbors(const NodeState& state,
                                                   double at_time, int k) {
  if (k < 1) throw std::invalid_argument("recent_neighbors: k must be positive");
  std::vector<const NeighborEntry*> out;
  for (auto it = state.neighbors.rbegin();
       it != state.neighbors.rend() && static_cast<int>(out.size()) < k; ++it)
    if (it->t < at_time) out.push_back(&*it);
  return out;
}

Eigen::VectorXd time_encode_value(const Model& model, double delta) {
  const ParamStore& p = model.params();
  const ad::Mat& omega = p.value(p.find("time.omega"));
  const ad::Mat& phi = p.value(p.find("time.phi"));
  return (omega.col(0).array() * delta + phi.col(0).array()).cos();
}

AdvanceVars advance_states(ad::Tape& t, const Model& model, const ModelRefs& refs,
                           NodeStates& states, std::span<const Interaction> batch) {
  AdvanceVars adv;
  if (batch.empty()) return adv;
  const int d_mem = model.config().d_mem;
  const int n_feat = model.schema().size();

  // Most recent message per touched node, in first-touch order.
  struct Message {
    int peer;
    double t_event;
    const std::vector<double>* features;
  };
  std::vector<int> order;
  std::unordered_map<int, Message> last_msg;
  for (const Interaction& ev : batch) {
    for (const auto& [node, peer] : {std::pair{ev.src, ev.dst}, {ev.dst, ev.src}}) {
      if (ev.t < states[node].last_update)
        throw std::runtime_error(
            "temporal-consistency error: batch timestamp precedes last_update "
            "of node " + std::to_string(node));
      auto [it, inserted] = last_msg.try_emplace(node);
      if (inserted) order.push_back(node);
      it->second = Message{peer, ev.t, &ev.features};
    }
  }

  const int K = static_cast<int>(order.size());
  ad::Mat own(d_mem, K), peer(d_mem, K), feats(n_feat, K);
  std::vector<double> deltas(K);
  for (int i = 0; i < K; ++i) {
    const Message& m = last_msg.at(order[i]);
    own.col(i) = states[order[i]].memory;
    peer.col(i) = states[m.peer].memory;
    deltas[i] = m.t_event - states[order[i]].last_update;
    for (int f = 0; f < n_feat; ++f) feats(f, i) = (*m.features)[f];
  }

  std::vector<ad::Var> parts = {t.constant(std::move(own)), t.constant(std::move(peer)),
                                time_encode_row(t, refs, deltas)};
  if (n_feat > 0) parts.push_back(t.constant(std::move(feats)));
  const ad::Var x = t.vcat(parts);

  ad::Mat h_old(d_mem, K);
  for (int i = 0; i < K; ++i) h_old.col(i) = states[order[i]].memory;
  adv.h_new = gru_cell(t, refs.mem_gru, x, t.constant(std::move(h_old)));
  adv.touched = order;

  // Commit: memory values, last-update times, then neighbor appends.
  for (int i = 0; i < K; ++i) {
    NodeState& s = states[order[i]];
    s.memory = t.val(adv.h_new).col(i);
    s.last_update = last_msg.at(order[i]).t_event;
  }
  const int cap = model.config().k_nbr;
  for (const Interaction& ev : batch) {
    auto push = [&](int node, int other) {
      auto& list = states[node].neighbors;
      list.push_back({other, ev.t, ev.features});
      if (static_cast<int>(list.size()) > cap) list.erase(list.begin());
    };
    push(ev.src, ev.dst);
    push(ev.dst, ev.src);
  }
  return adv;
}

void update_memory(const Model& model, NodeStates& states,
                   std::span<const Interaction> batch) {
  ad::Tape t(false);
  const ModelRefs refs = model.make_refs(t);
  advance_states(t, model, refs, states, batch);
}

ad::Var embed_nodes(ad::Tape& t, const Model& model, const ModelRefs& refs,
                    const NodeStates& states, const AdvanceVars* adv,
                    const std::vector<int>& nodes, double at_time) {
  if (nodes.empty()) throw std::invalid_argument("embed_nodes: empty node list");
  const ModelConfig& cfg = model.config();
  const int C = static_cast<int>(nodes.size());
  const int d_emb = cfg.d_emb;
  const int n_feat = model.schema().size();

  const ad::Var mem = gathered_memory(t, states, adv, nodes, cfg.d_mem);
  const ad::Var q_time = time_encode_row(t, refs, std::vector<double>(C, 0.0));

  ad::Var attn_out;
  std::vector<std::vector<const NeighborEntry*>> nbrs(C);
  bool any_neighbor = false;
  if (!cfg.disable_attention) {
    for (int c = 0; c < C; ++c) {
      nbrs[c] = recent_neighbors(states[nodes[c]], at_time, cfg.k_nbr);
      any_neighbor = any_neighbor || !nbrs[c].empty();
    }
  }

  if (cfg.disable_attention || !any_neighbor) {
    attn_out = t.constant(ad::Mat::Zero(d_emb, C));
  } else {
    const int S = cfg.k_nbr;  // fixed slot count; unused slots are masked
    std::vector<int> peers(C * S);
    std::vector<double> nbr_deltas(C * S, 0.0);
    ad::Mat nbr_feats = ad::Mat::Zero(n_feat, C * S);
    ad::Mat mask = ad::Mat::Zero(S, C);
    ad::Mat col_mask(d_emb, C);
    for (int c = 0; c < C; ++c) {
      col_mask.col(c).setConstant(nbrs[c].empty() ? 0.0 : 1.0);
      for (int j = 0; j < S; ++j) {
        const int at = c * S + j;
        if (j < static_cast<int>(nbrs[c].size())) {
          peers[at] = nbrs[c][j]->peer;
          nbr_deltas[at] = at_time - nbrs[c][j]->t;
          for (int f = 0; f < n_feat; ++f) nbr_feats(f, at) = nbrs[c][j]->features[f];
        } else {
          peers[at] = nodes[c];  // placeholder column, masked below
          mask(j, c) = -1e30;
        }
      }
    }

    const ad::Var peer_mem = gathered_memory(t, states, adv, peers, cfg.d_mem);
    std::vector<ad::Var> key_parts = {peer_mem, time_encode_row(t, refs, nbr_deltas)};
    if (n_feat > 0) key_parts.push_back(t.constant(std::move(nbr_feats)));
    const ad::Var key_in = t.vcat(key_parts);

    const ad::Var q = t.matmul(refs.attn_wq, t.vcat({mem, q_time}));
    const ad::Var k = t.matmul(refs.attn_wk, key_in);
    const ad::Var v = t.matmul(refs.attn_wv, key_in);
    const ad::Var mask_var = t.constant(std::move(mask));

    const int dk = d_emb / cfg.attn_heads;
    std::vector<ad::Var> heads;
    for (int h = 0; h < cfg.attn_heads; ++h) {
      const ad::Var qh = t.slice_rows(q, h * dk, dk);
      const ad::Var kh = t.slice_rows(k, h * dk, dk);
      const ad::Var vh = t.slice_rows(v, h * dk, dk);
      const ad::Var scores =
          t.add(t.scale(t.attn_scores(qh, kh, S), 1.0 / std::sqrt(dk)), mask_var);
      heads.push_back(t.attn_mix(vh, t.softmax_cols(scores), S));
    }
    attn_out = t.cmul(t.vcat(heads), t.constant(std::move(col_mask)));
  }

  const ad::Var ffn_in = t.vcat({attn_out, mem, q_time});
  const ad::Var hidden = t.relu(t.add_col(t.matmul(refs.ffn_w1, ffn_in), refs.ffn_b1));
  return t.add_col(t.matmul(refs.ffn_w2, hidden), refs.ffn_b2);
}

std::vector<Eigen::VectorXd> embed_values(const Model& model,
                                          const NodeStates& states,
                                          const std::vector<int>& nodes,
                                          double at_time) {
  ad::Tape t(false);
  const ModelRefs refs = model.make_refs(t);
  const ad::Var z = embed_nodes(t, model, refs, states, nullptr, nodes, at_time);
  std::vector<Eigen::VectorXd> out;
  out.reserve(nodes.size());
  for (Eigen::Index c = 0; c < t.val(z).cols(); ++c) out.push_back(t.val(z).col(c));
  return out;
}

}  // namespace dggen
