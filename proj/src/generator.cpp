// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/generator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace dggen {

namespace {

constexpr int kMaxDestinationResamples = 10;
constexpr int kMaxEmptyRounds = 10;
constexpr int kScoreChunk = 256;  // queries per throwaway tape

}  // namespace

void GenerationConfig::validate() const {
  if (num_interactions < 0) {
    throw std::invalid_argument("number of interactions must be >= 0");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("generation batch size must be >= 1");
  }
  if (node_pool_size < 1) {
    throw std::invalid_argument("node pool must hold at least one node");
  }
  if (num_interactions > 0 && node_pool_size < 2) {
    throw std::invalid_argument(
        "a one-node pool can only produce self loops; need at least two nodes");
  }
}

EventStream generate(const Model& model, const GenerationConfig& config,
                     GenerationStats* stats) {
  config.validate();
  GenerationStats local;

  const int pool = config.node_pool_size;
  const int n_feat = model.schema().size();
  Rng rng = Rng::stream(config.seed, "generate");
  NodeStates states(pool, model.config().d_mem, 0.0);

  std::vector<int> all_nodes(pool);
  std::iota(all_nodes.begin(), all_nodes.end(), 0);

  std::vector<Interaction> events;
  events.reserve(static_cast<std::size_t>(config.num_interactions));
  double clock = 0.0;
  int empty_rounds = 0;

  while (static_cast<long long>(events.size()) < config.num_interactions) {
    ad::Tape tape(false);
    ModelRefs refs = model.make_refs(tape);

    ad::Var z = embed_nodes(tape, model, refs, states, nullptr, all_nodes, clock);

    ad::Var src_scores = reshape_scores_row(tape, refs, z);
    CategoricalParams src_dist{tape.val(src_scores).row(0).transpose()};
    std::vector<int> srcs(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b) {
      srcs[b] = sample_categorical(src_dist, rng);
    }

    ad::Var z_src = tape.gather_cols(z, srcs);
    ad::Var dst_logits = destination_logit_matrix(tape, refs, z_src, z);
    const ad::Mat& logits = tape.val(dst_logits);

    std::vector<int> kept_src;
    std::vector<int> kept_dst;
    kept_src.reserve(srcs.size());
    kept_dst.reserve(srcs.size());
    for (int b = 0; b < config.batch_size; ++b) {
      CategoricalParams dist{logits.col(b)};
      int dst = sample_categorical(dist, rng);
      int tries = 0;
      while (dst == srcs[b] && tries < kMaxDestinationResamples) {
        dst = sample_categorical(dist, rng);
        ++tries;
        ++local.destination_resamples;
      }
      if (dst == srcs[b]) {
        ++local.self_loop_skips;
        continue;
      }
      kept_src.push_back(srcs[b]);
      kept_dst.push_back(dst);
    }

    if (kept_src.empty()) {
      if (++empty_rounds >= kMaxEmptyRounds) {
        throw std::runtime_error(
            "generation stalled: every destination draw was a self loop for " +
            std::to_string(kMaxEmptyRounds) + " consecutive rounds");
      }
      continue;
    }
    empty_rounds = 0;

    ad::Var z_s = tape.gather_cols(z, kept_src);
    ad::Var z_d = tape.gather_cols(z, kept_dst);
    ad::Var h0 = merge_h0(tape, refs, z_s, z_d);
    SampledTail tail = sample_time_msg(model, refs, tape, h0, rng);

    // The batch shares one conditioning time; order its events by delta so
    // the cumulative clock stays monotone.
    std::vector<int> order(kept_src.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return tail.deltas[a] < tail.deltas[b];
    });

    std::vector<Interaction> batch;
    batch.reserve(order.size());
    double t = clock;
    for (int idx : order) {
      t += tail.deltas[idx];
      Interaction ev;
      ev.src = kept_src[idx];
      ev.dst = kept_dst[idx];
      ev.t = t;
      ev.features.resize(n_feat);
      for (int f = 0; f < n_feat; ++f) {
        ev.features[f] = tail.features[f][idx];
      }
      batch.push_back(std::move(ev));
    }
    clock = t;

    update_memory(model, states, batch);
    for (auto& ev : batch) {
      events.push_back(std::move(ev));
    }
  }

  events.resize(static_cast<std::size_t>(config.num_interactions));
  if (stats != nullptr) {
    *stats = local;
  }
  return EventStream(model.schema(), pool, 0.0, std::move(events));
}

std::vector<double> score_links(const Model& model, const NodeStates& states,
                                const std::vector<LinkQuery>& queries) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (std::size_t base = 0; base < queries.size(); base += kScoreChunk) {
    // One tape per chunk: parameter constants amortize, memory stays bounded.
    ad::Tape tape(false);
    ModelRefs refs = model.make_refs(tape);
    const std::size_t end = std::min(queries.size(), base + kScoreChunk);
    for (std::size_t i = base; i < end; ++i) {
      const LinkQuery& q = queries[i];
      if (q.src < 0 || q.src >= states.size() || q.dst < 0 ||
          q.dst >= states.size()) {
        throw std::domain_error("link query names a node outside the state table");
      }
      ad::Var z = embed_nodes(tape, model, refs, states, nullptr,
                              {q.src, q.dst}, q.t);
      const Eigen::VectorXd z_src = tape.val(z).col(0);
      const Eigen::VectorXd z_dst = tape.val(z).col(1);
      out.push_back(product_score(model, z_src, z_dst));
    }
  }
  return out;
}

}  // namespace dggen
