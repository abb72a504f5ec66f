// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dggen {

void ModelConfig::resolve_and_validate() {
  if (d_hidden == 0) d_hidden = d_emb;
  if (d_seq_hidden == 0) d_seq_hidden = d_emb;
  auto positive = [](int v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string("model config: ") + what +
                                           " must be positive");
  };
  positive(d_mem, "d_mem");
  positive(d_emb, "d_emb");
  positive(d_time, "d_time");
  positive(k_nbr, "k_nbr");
  positive(attn_heads, "attn_heads");
  positive(d_hidden, "d_hidden");
  positive(d_seq_hidden, "d_seq_hidden");
  positive(d_seq_in, "d_seq_in");
  positive(gmm_components, "gmm_components");
  if (d_emb % attn_heads != 0)
    throw std::invalid_argument("model config: attn_heads must divide d_emb");
}

int Model::msg_dim() const {
  return 2 * config_.d_mem + config_.d_time + schema_.size();
}
int Model::query_in_dim() const { return config_.d_mem + config_.d_time; }
int Model::key_in_dim() const {
  return config_.d_mem + config_.d_time + schema_.size();
}

Model::Model(FeatureSchema schema, ModelConfig config, Rng& rng)
    : schema_(std::move(schema)), config_(config) {
  schema_.validate();
  config_.resolve_and_validate();
  const int d_mem = config_.d_mem;
  const int d_emb = config_.d_emb;
  const int d_time = config_.d_time;
  const int d_h = config_.d_hidden;
  const int d_h0 = config_.d_seq_hidden;
  const int d_in = config_.d_seq_in;
  const int m = config_.gmm_components;

  // Registration order is frozen: it defines checkpoint layout and the
  // init-stream draw sequence.
  // Frequencies span decades so one encoding covers short and long gaps.
  ad::Mat omega(d_time, 1);
  for (int j = 0; j < d_time; ++j)
    omega(j, 0) = std::pow(10.0, d_time > 1 ? -3.0 * j / (d_time - 1) : 0.0);
  id_time_omega_ = params_.add("time.omega", omega);
  id_time_phi_ = params_.add("time.phi", ad::Mat::Zero(d_time, 1));

  id_mem_gru_ = register_gru(params_, "mem.gru", msg_dim(), d_mem, rng);

  id_attn_wq_ = params_.add("attn.w_q", glorot_uniform(rng, d_emb, query_in_dim()));
  id_attn_wk_ = params_.add("attn.w_k", glorot_uniform(rng, d_emb, key_in_dim()));
  id_attn_wv_ = params_.add("attn.w_v", glorot_uniform(rng, d_emb, key_in_dim()));
  const int ffn_in = d_emb + d_mem + d_time;
  id_ffn_w1_ = params_.add("ffn.w1", glorot_uniform(rng, d_emb, ffn_in));
  id_ffn_b1_ = params_.add("ffn.b1", ad::Mat::Zero(d_emb, 1));
  id_ffn_w2_ = params_.add("ffn.w2", glorot_uniform(rng, d_emb, d_emb));
  id_ffn_b2_ = params_.add("ffn.b2", ad::Mat::Zero(d_emb, 1));

  id_resh_w_ = params_.add("dec.reshape.w", glorot_uniform(rng, d_h, d_emb));
  id_resh_wf_ = params_.add("dec.reshape.wf", glorot_uniform(rng, 1, d_h));
  id_prod_wsrc_ = params_.add("dec.product.w_src", glorot_uniform(rng, d_h, d_emb));
  id_prod_wdst_ = params_.add("dec.product.w_dst", glorot_uniform(rng, d_h, d_emb));
  id_prod_wf_ = params_.add("dec.product.wf", glorot_uniform(rng, 1, d_h));
  id_merge_wsrc_ = params_.add("dec.merge.w_src", glorot_uniform(rng, d_h, d_emb));
  id_merge_wdst_ = params_.add("dec.merge.w_dst", glorot_uniform(rng, d_h, d_emb));
  id_merge_wf_ = params_.add("dec.merge.wf", glorot_uniform(rng, d_h0, d_h));

  id_seq_gru_ = register_gru(params_, "dec.seq", d_in, d_h0, rng);
  id_start_ = params_.add("dec.start_token", glorot_uniform(rng, d_in, 1));
  id_time_w_ = params_.add("dec.time.w", glorot_uniform(rng, 1, d_h0));
  id_time_b_ = params_.add("dec.time.b", ad::Mat::Zero(1, 1));
  id_delta_w_ = params_.add("dec.delta_embed.w", glorot_uniform(rng, d_in, 1));
  id_delta_b_ = params_.add("dec.delta_embed.b", ad::Mat::Zero(d_in, 1));

  for (int f = 0; f < schema_.size(); ++f) {
    const FeatureDescriptor& d = schema_.features[f];
    const std::string base = "dec.feat" + std::to_string(f);
    FeatIds ids;
    if (d.kind == FeatureKind::categorical) {
      ids.embed_w = params_.add(base + ".embed", glorot_uniform(rng, d_in, d.cardinality));
      ids.head_w = params_.add(base + ".head.w", glorot_uniform(rng, d.cardinality, d_h0));
      ids.head_b = params_.add(base + ".head.b", ad::Mat::Zero(d.cardinality, 1));
    } else {
      ids.embed_w = params_.add(base + ".embed.w", glorot_uniform(rng, d_in, 1));
      ids.embed_b = params_.add(base + ".embed.b", ad::Mat::Zero(d_in, 1));
      ids.head_w = params_.add(base + ".head.w", glorot_uniform(rng, 3 * m, d_h0));
      ids.head_b = params_.add(base + ".head.b", ad::Mat::Zero(3 * m, 1));
    }
    id_feats_.push_back(ids);
  }
}

ModelRefs Model::make_refs(ad::Tape& tape) const {
  ModelRefs r;
  r.leaves = params_.make_leaves(tape);
  auto at = [&](int id) { return r.leaves[id]; };

  r.time_omega = at(id_time_omega_);
  r.time_phi = at(id_time_phi_);
  r.mem_gru = gru_refs(r.leaves, id_mem_gru_);
  r.attn_wq = at(id_attn_wq_);
  r.attn_wk = at(id_attn_wk_);
  r.attn_wv = at(id_attn_wv_);
  r.ffn_w1 = at(id_ffn_w1_);
  r.ffn_b1 = at(id_ffn_b1_);
  r.ffn_w2 = at(id_ffn_w2_);
  r.ffn_b2 = at(id_ffn_b2_);
  r.resh_w = at(id_resh_w_);
  r.resh_wf = at(id_resh_wf_);
  r.prod_wsrc = at(id_prod_wsrc_);
  r.prod_wdst = at(id_prod_wdst_);
  r.prod_wf = at(id_prod_wf_);
  r.merge_wsrc = at(id_merge_wsrc_);
  r.merge_wdst = at(id_merge_wdst_);
  r.merge_wf = at(id_merge_wf_);
  r.seq_gru = gru_refs(r.leaves, id_seq_gru_);
  r.start_token = at(id_start_);
  r.time_head_w = at(id_time_w_);
  r.time_head_b = at(id_time_b_);
  r.delta_embed_w = at(id_delta_w_);
  r.delta_embed_b = at(id_delta_b_);
  for (std::size_t f = 0; f < id_feats_.size(); ++f) {
    ModelRefs::FeatureIo io;
    io.categorical = schema_.features[f].kind == FeatureKind::categorical;
    io.cardinality = schema_.features[f].cardinality;
    io.embed_w = at(id_feats_[f].embed_w);
    if (id_feats_[f].embed_b >= 0) io.embed_b = at(id_feats_[f].embed_b);
    io.head_w = at(id_feats_[f].head_w);
    io.head_b = at(id_feats_[f].head_b);
    r.feats.push_back(io);
  }
  return r;
}

}  // namespace dggen
