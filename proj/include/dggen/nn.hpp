// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dggen/rng.hpp"
#include "dggen/tape.hpp"

namespace dggen {

// Named trainable matrices in registration order.  Registration order is
// the serialization order, so it must stay stable across runs of the same
// configuration.
class ParamStore {
 public:
  int add(const std::string& name, ad::Mat init);
  int count() const { return static_cast<int>(values_.size()); }
  int find(const std::string& name) const;  // -1 when absent

  const std::string& name(int i) const { return names_[i]; }
  ad::Mat& value(int i) { return values_[i]; }
  const ad::Mat& value(int i) const { return values_[i]; }
  ad::Mat& value(const std::string& name);

  // Creates one gradient-carrying leaf per parameter, aligned with indices.
  std::vector<ad::Var> make_leaves(ad::Tape& tape) const;

 private:
  std::vector<std::string> names_;
  std::vector<ad::Mat> values_;
  std::unordered_map<std::string, int> index_;
};

// Adam optimizer with bias correction.  Moments are serialized into
// checkpoints so a resumed run continues bit-exactly.
class Adam {
 public:
  explicit Adam(double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void init(const ParamStore& params);
  void step(ParamStore& params, const std::vector<ad::Mat>& grads);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  long long steps_taken() const { return t_; }

  // Checkpoint access.
  std::vector<ad::Mat>& first_moments() { return m_; }
  std::vector<ad::Mat>& second_moments() { return v_; }
  const std::vector<ad::Mat>& first_moments() const { return m_; }
  const std::vector<ad::Mat>& second_moments() const { return v_; }
  void set_steps_taken(long long t) { t_ = t; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<ad::Mat> m_, v_;
};

// Glorot-uniform init: U(-a, a) with a = sqrt(6 / (rows + cols)).
ad::Mat glorot_uniform(Rng& rng, int rows, int cols);

// Tape handles for one GRU cell.
struct GruRefs {
  ad::Var w_ir, w_iz, w_in;  // input weights  [hidden x in]
  ad::Var w_hr, w_hz, w_hn;  // hidden weights [hidden x hidden]
  ad::Var b_ir, b_iz, b_in;  // input biases   [hidden x 1]
  ad::Var b_hr, b_hz, b_hn;  // hidden biases  [hidden x 1]
};

// Registers the 12 GRU parameters under `prefix.` and returns their indices
// in registration order (matching gru_refs).
std::vector<int> register_gru(ParamStore& params, const std::string& prefix,
                              int in_dim, int hidden, Rng& rng);
GruRefs gru_refs(const std::vector<ad::Var>& leaves, const std::vector<int>& idx);

// One GRU step over a column batch: x is [in x B], h is [hidden x B].
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
ad::Var gru_cell(ad::Tape& tape, const GruRefs& g, ad::Var x, ad::Var h);

}  // namespace dggen
