// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dggen/model.hpp"
#include "dggen/rng.hpp"
#include "dggen/tape.hpp"

namespace dggen {

// Parameter blocks of the per-interaction distribution.

struct ExponentialParam {
  double rate = 1.0;
};

struct CategoricalParams {
  Eigen::VectorXd logits;
  Eigen::VectorXd probabilities() const;  // stable softmax of logits
  double log_prob(int index) const;
};

struct GMMParams {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;     // strictly positive
  Eigen::VectorXd weights;  // probabilities, sum to 1
  double log_density(double x) const;
};

using FeatureHeadParams = std::variant<CategoricalParams, GMMParams>;

struct TimeMsgParams {
  ExponentialParam time;
  std::vector<FeatureHeadParams> feature_heads;  // schema order
};

struct InteractionDistribution {
  CategoricalParams source;       // over candidate slots
  CategoricalParams destination;  // over candidate slots
  TimeMsgParams tail;
};

// One observed interaction expressed against a candidate list.
struct ObservedInteraction {
  int src_index = 0;
  int dst_index = 0;
  double delta = 0.0;
  std::vector<double> features;
};

// Realized inputs the sequence decoder is conditioned on (delta and all
// features except the last one are fed back as inputs).
struct ObservedTail {
  double delta = 0.0;
  std::vector<double> features;
};

// Maps any finite raw value to a strictly positive one: softplus(x) + 1e-12.
double positive_transform(double raw);

// --- scalar scoring (non-differentiable convenience wrappers) ---

double reshape_score(const Model& model, const Eigen::VectorXd& z);
double product_score(const Model& model, const Eigen::VectorXd& z_src,
                     const Eigen::VectorXd& z_dst);
Eigen::VectorXd merge_embeddings(const Model& model, const Eigen::VectorXd& z_src,
                                 const Eigen::VectorXd& z_dst);

CategoricalParams source_distribution(const Model& model,
                                      const std::vector<Eigen::VectorXd>& candidates);
CategoricalParams destination_distribution(
    const Model& model, const Eigen::VectorXd& z_src,
    const std::vector<Eigen::VectorXd>& candidates);

// Teacher-forced tail parameters from a merge vector h0.  `observed` supplies
// the realized delta and features and may be null only for an empty schema.
TimeMsgParams time_msg_params(const Model& model, const Eigen::VectorXd& h0,
                              const ObservedTail* observed);

// Log density of one observed interaction under a full distribution.
// Throws std::domain_error on values outside the support.
double interaction_log_likelihood(const InteractionDistribution& dist,
                                  const ObservedInteraction& obs);

// --- sampling ---

int sample_categorical(const CategoricalParams& params, Rng& rng);
double sample_exponential(const ExponentialParam& param, Rng& rng);
double sample_gmm(const GMMParams& params, Rng& rng);

struct SampledTail {
  std::vector<double> deltas;             // [batch]
  std::vector<std::vector<double>> features;  // [n_features][batch]
};

// Ancestral sampling of (delta, features) for a batch of merge vectors
// h0 [d_h0 x B].  Draw order: step-major, batch-minor.
SampledTail sample_time_msg(const Model& model, const ModelRefs& refs,
                            ad::Tape& tape, ad::Var h0, Rng& rng);

// --- differentiable builders (training path) ---

// Row of source scores for candidate embeddings z [d_emb x C] -> [1 x C].
ad::Var reshape_scores_row(ad::Tape& tape, const ModelRefs& refs, ad::Var z);

// Destination logits for every (candidate, source) pair:
// z_src [d_emb x B], z_cand [d_emb x C] -> [C x B].
ad::Var destination_logit_matrix(ad::Tape& tape, const ModelRefs& refs,
                                 ad::Var z_src, ad::Var z_cand);

// Merge of source/destination embeddings -> sequence state h0 [d_h0 x B].
ad::Var merge_h0(ad::Tape& tape, const ModelRefs& refs, ad::Var z_src,
                 ad::Var z_dst);

// Realized (possibly noise-perturbed) teacher-forcing inputs for a batch.
struct RealizedBatch {
  std::vector<double> deltas;                  // [B]
  std::vector<std::vector<double>> features;   // [n_features][B]
};

struct SeqHeads {
  ad::Var rate;               // [1 x B], strictly positive
  std::vector<ad::Var> raw;   // per feature: logits [card x B] or GMM raw [3m x B]
};

// Unrolls the sequence decoder with teacher forcing.
SeqHeads build_time_msg(ad::Tape& tape, const Model& model, const ModelRefs& refs,
                        ad::Var h0, const RealizedBatch& realized);

// log p(idx[b]) per column of a logits matrix [card x B] -> [1 x B].
ad::Var categorical_log_prob_row(ad::Tape& tape, ad::Var logits,
                                 const std::vector<int>& indices);

// log density of x[b] under the GMM encoded by raw [3m x B] -> [1 x B].
ad::Var gmm_log_density_row(ad::Tape& tape, ad::Var raw,
                            const std::vector<double>& x, int components);

// Scalar GMM parameters from a raw head column of size 3m.
GMMParams gmm_from_raw(const Eigen::VectorXd& raw, int components);

}  // namespace dggen
