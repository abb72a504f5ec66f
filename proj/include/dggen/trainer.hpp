// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "dggen/decoder.hpp"
#include "dggen/encoder.hpp"
#include "dggen/event_store.hpp"
#include "dggen/model.hpp"
#include "dggen/nn.hpp"
#include "dggen/rng.hpp"

namespace dggen {

struct TrainConfig {
  int batch_size = 200;
  int epochs = 50;
  double learning_rate = 1e-4;
  double candidate_multiplier = 2.0;  // target candidates = multiplier * batch size
  double noise_sigma_start = 0.1;
  double noise_sigma_end = 0.001;
  std::uint64_t seed = 0;
  bool disable_noise = false;
  bool disable_attention = false;  // forwarded into ModelConfig by callers

  void validate() const;
};

struct EpochLog {
  int epoch = 0;  // 1-based cumulative epoch number
  double mean_nll = 0.0;
  double sigma = 0.0;  // noise level of the epoch's last step
  double wall_seconds = 0.0;
};

// Noise level for one optimizer step: geometric interpolation from
// sigma_start (step 0) to sigma_end (step = total_steps); 0 when disabled.
double noise_sigma(long long step, long long total_steps, const TrainConfig& config);

// Candidate node set for sampled softmax: every node of the batch plus
// uniformly drawn extras, min(target_size, num_nodes) total.  Order is
// deterministic: batch nodes by first appearance, then extras in draw order.
std::vector<int> sample_candidates(int num_nodes,
                                   std::span<const Interaction> batch,
                                   int target_size, Rng& rng);

// Negative sum of interaction log likelihoods over one batch, built on the
// tape.  Candidates are embedded once at the first batch timestamp.  The
// first inter-event delta is measured against prev_time.  When sigma > 0,
// Gaussian noise is drawn from noise_rng and added to deltas (clamped at 0)
// and numerical feature values before they enter both the teacher-forced
// inputs and the likelihood.
ad::Var batch_nll(ad::Tape& tape, const Model& model, const ModelRefs& refs,
                  const NodeStates& states, const AdvanceVars* adv,
                  std::span<const Interaction> batch,
                  const std::vector<int>& candidates, double prev_time,
                  double sigma, Rng* noise_rng);

// Owns the model, encoder state, optimizer, and training RNG.  Training is
// single threaded; identical seeds give bit-identical results.
class TrainerSession {
 public:
  TrainerSession(Model model, int num_nodes, double origin_time, TrainConfig config);

  // Runs `run_epochs` epochs (all remaining when negative).  Each epoch
  // resets the encoder memory and walks the stream chronologically; each
  // step re-advances the previous batch differentiably, scores the current
  // batch against sampled candidates, and applies one Adam step.  After the
  // final configured epoch the last batch is folded into the memory so the
  // session state reflects the whole stream.
  std::vector<EpochLog> fit(const EventStream& stream, int run_epochs = -1);

  // Mean per-event NLL of a stream under the current weights, scored with
  // the full node universe as candidates and no noise.  Advances `states`
  // through the stream (pass a copy to keep the session state intact).
  double stream_nll(const EventStream& stream, NodeStates& states,
                    double prev_time) const;

  const Model& model() const { return model_; }
  Model& model() { return model_; }
  NodeStates& states() { return states_; }
  const NodeStates& states() const { return states_; }
  const TrainConfig& config() const { return config_; }
  int num_nodes() const { return num_nodes_; }
  double origin_time() const { return origin_; }
  Adam& optimizer() { return adam_; }
  Rng& train_rng() { return rng_; }
  long long global_step() const { return global_step_; }
  int epochs_done() const { return epochs_done_; }

  // Versioned binary checkpoint ("DGG1"): weights, optimizer moments, node
  // states, RNG state, and step counters round-trip bit-exactly.
  void save(const std::string& path) const;
  static TrainerSession load(const std::string& path);

 private:
  Model model_;
  int num_nodes_;
  double origin_;
  TrainConfig config_;
  NodeStates states_;
  Adam adam_;
  Rng rng_;
  long long global_step_ = 0;
  int epochs_done_ = 0;
};

}  // namespace dggen
