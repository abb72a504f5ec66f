// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace dggen {

int ParamStore::add(const std::string& name, ad::Mat init) {
  if (index_.count(name)) throw std::logic_error("duplicate parameter: " + name);
  const int id = count();
  index_.emplace(name, id);
  names_.push_back(name);
  values_.push_back(std::move(init));
  return id;
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

ad::Mat& ParamStore::value(const std::string& name) {
  const int id = find(name);
  if (id < 0) throw std::out_of_range("unknown parameter: " + name);
  return values_[id];
}

std::vector<ad::Var> ParamStore::make_leaves(ad::Tape& tape) const {
  std::vector<ad::Var> leaves;
  leaves.reserve(values_.size());
  for (const ad::Mat& v : values_) leaves.push_back(tape.leaf(v, true));
  return leaves;
}

void Adam::init(const ParamStore& params) {
  m_.clear();
  v_.clear();
  for (int i = 0; i < params.count(); ++i) {
    m_.push_back(ad::Mat::Zero(params.value(i).rows(), params.value(i).cols()));
    v_.push_back(ad::Mat::Zero(params.value(i).rows(), params.value(i).cols()));
  }
  t_ = 0;
}

void Adam::step(ParamStore& params, const std::vector<ad::Mat>& grads) {
  if (m_.empty()) init(params);
  if (grads.size() != m_.size())
    throw std::invalid_argument("adam: gradient count mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const ad::Mat& g = grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    const ad::Mat m_hat = m_[i] / c1;
    const ad::Mat v_hat = v_[i] / c2;
    params.value(static_cast<int>(i)).array() -=
        lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
  }
}

ad::Mat glorot_uniform(Rng& rng, int rows, int cols) {
  const double a = std::sqrt(6.0 / (rows + cols));
  ad::Mat m(rows, cols);
  // Column-major fill order: the draw sequence is part of the
  // reproducibility contract.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = (2.0 * rng.uniform() - 1.0) * a;
  return m;
}

std::vector<int> register_gru(ParamStore& params, const std::string& prefix,
                              int in_dim, int hidden, Rng& rng) {
  std::vector<int> idx;
  for (const char* gate : {"r", "z", "n"})
    idx.push_back(params.add(prefix + ".w_i" + gate, glorot_uniform(rng, hidden, in_dim)));
  for (const char* gate : {"r", "z", "n"})
    idx.push_back(params.add(prefix + ".w_h" + gate, glorot_uniform(rng, hidden, hidden)));
  for (const char* gate : {"r", "z", "n"})
    idx.push_back(params.add(prefix + ".b_i" + gate, ad::Mat::Zero(hidden, 1)));
  for (const char* gate : {"r", "z", "n"})
    idx.push_back(params.add(prefix + ".b_h" + gate, ad::Mat::Zero(hidden, 1)));
  return idx;
}

GruRefs gru_refs(const std::vector<ad::Var>& leaves, const std::vector<int>& idx) {
  if (idx.size() != 12) throw std::logic_error("gru_refs: expected 12 indices");
  GruRefs g;
  g.w_ir = leaves[idx[0]];
  g.w_iz = leaves[idx[1]];
  g.w_in = leaves[idx[2]];
  g.w_hr = leaves[idx[3]];
  g.w_hz = leaves[idx[4]];
  g.w_hn = leaves[idx[5]];
  g.b_ir = leaves[idx[6]];
  g.b_iz = leaves[idx[7]];
  g.b_in = leaves[idx[8]];
  g.b_hr = leaves[idx[9]];
  g.b_hz = leaves[idx[10]];
  g.b_hn = leaves[idx[11]];
  return g;
}

ad::Var gru_cell(ad::Tape& t, const GruRefs& g, ad::Var x, ad::Var h) {
  const ad::Var r = t.sigmoid(t.add(t.add_col(t.matmul(g.w_ir, x), g.b_ir),
                                    t.add_col(t.matmul(g.w_hr, h), g.b_hr)));
  const ad::Var z = t.sigmoid(t.add(t.add_col(t.matmul(g.w_iz, x), g.b_iz),
                                    t.add_col(t.matmul(g.w_hz, h), g.b_hz)));
  const ad::Var n = t.tanh_(t.add(t.add_col(t.matmul(g.w_in, x), g.b_in),
                                  t.cmul(r, t.add_col(t.matmul(g.w_hn, h), g.b_hn))));
  // h' = n - z*n + z*h
  return t.add(t.sub(n, t.cmul(z, n)), t.cmul(z, h));
}

}  // namespace dggen
