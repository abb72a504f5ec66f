// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "dggen/event_store.hpp"
#include "dggen/nn.hpp"
#include "dggen/rng.hpp"
#include "dggen/tape.hpp"

namespace dggen {

// Architecture hyperparameters.  Zeros for d_hidden / d_seq_hidden resolve
// to d_emb.  The attention head count must divide d_emb.
struct ModelConfig {
  int d_mem = 100;
  int d_emb = 100;
  int d_time = 8;
  int k_nbr = 10;
  int attn_heads = 2;
  int d_hidden = 0;      // pair scorers' hidden width
  int d_seq_hidden = 0;  // sequence decoder hidden width (= h_0 size)
  int d_seq_in = 16;     // per-step input embedding width
  int gmm_components = 3;
  bool disable_attention = false;

  void resolve_and_validate();
};

// Per-tape handles to every trainable parameter, grouped by role.
struct ModelRefs {
  std::vector<ad::Var> leaves;  // aligned with ParamStore indices

  ad::Var time_omega, time_phi;  // [d_time x 1]
  GruRefs mem_gru;

  ad::Var attn_wq, attn_wk, attn_wv;      // [d_emb x query/key width]
  ad::Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;

  ad::Var resh_w, resh_wf;                 // [d_h x d_emb], [1 x d_h]
  ad::Var prod_wsrc, prod_wdst, prod_wf;   // [d_h x d_emb] x2, [1 x d_h]
  ad::Var merge_wsrc, merge_wdst, merge_wf;  // [d_h x d_emb] x2, [d_h0 x d_h]

  GruRefs seq_gru;
  ad::Var start_token;               // [d_seq_in x 1]
  ad::Var time_head_w, time_head_b;  // [1 x d_h0], [1 x 1]
  ad::Var delta_embed_w, delta_embed_b;  // [d_seq_in x 1]

  struct FeatureIo {
    bool categorical = false;
    int cardinality = 0;
    ad::Var embed_w;  // categorical: [d_seq_in x card]; numerical: [d_seq_in x 1]
    ad::Var embed_b;  // numerical only
    ad::Var head_w;   // [card x d_h0] or [3m x d_h0]
    ad::Var head_b;
  };
  std::vector<FeatureIo> feats;
};

// Owns the parameter store and the wiring metadata.  The node universe is
// deliberately absent: scores come from embeddings, never id lookups.
class Model {
 public:
  Model(FeatureSchema schema, ModelConfig config, Rng& init_rng);

  const FeatureSchema& schema() const { return schema_; }
  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  int msg_dim() const;       // 2*d_mem + d_time + n_feat
  int query_in_dim() const;  // d_mem + d_time
  int key_in_dim() const;    // d_mem + d_time + n_feat

  ModelRefs make_refs(ad::Tape& tape) const;

 private:
  FeatureSchema schema_;
  ModelConfig config_;
  ParamStore params_;

  // Parameter indices in registration order, resolved once.
  int id_time_omega_, id_time_phi_;
  std::vector<int> id_mem_gru_;
  int id_attn_wq_, id_attn_wk_, id_attn_wv_;
  int id_ffn_w1_, id_ffn_b1_, id_ffn_w2_, id_ffn_b2_;
  int id_resh_w_, id_resh_wf_;
  int id_prod_wsrc_, id_prod_wdst_, id_prod_wf_;
  int id_merge_wsrc_, id_merge_wdst_, id_merge_wf_;
  std::vector<int> id_seq_gru_;
  int id_start_, id_time_w_, id_time_b_, id_delta_w_, id_delta_b_;
  struct FeatIds {
    int embed_w = -1, embed_b = -1, head_w = -1, head_b = -1;
  };
  std::vector<FeatIds> id_feats_;
};

}  // namespace dggen
