// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/decoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dggen {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double stable_softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logsumexp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// Scalar-path GRU parameters fetched by name; independent of the tape ops.
struct GruMats {
  Eigen::MatrixXd w_ir, w_iz, w_in, w_hr, w_hz, w_hn;
  Eigen::VectorXd b_ir, b_iz, b_in, b_hr, b_hz, b_hn;
};

GruMats fetch_gru(const ParamStore& p, const std::string& prefix) {
  auto mat = [&](const char* s) { return p.value(p.find(prefix + s)); };
  GruMats g;
  g.w_ir = mat(".w_ir");
  g.w_iz = mat(".w_iz");
  g.w_in = mat(".w_in");
  g.w_hr = mat(".w_hr");
  g.w_hz = mat(".w_hz");
  g.w_hn = mat(".w_hn");
  g.b_ir = mat(".b_ir");
  g.b_iz = mat(".b_iz");
  g.b_in = mat(".b_in");
  g.b_hr = mat(".b_hr");
  g.b_hz = mat(".b_hz");
  g.b_hn = mat(".b_hn");
  return g;
}

Eigen::VectorXd gru_scalar(const GruMats& g, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& h) {
  const Eigen::VectorXd r =
      (g.w_ir * x + g.b_ir + g.w_hr * h + g.b_hr).unaryExpr(&stable_sigmoid);
  const Eigen::VectorXd z =
      (g.w_iz * x + g.b_iz + g.w_hz * h + g.b_hz).unaryExpr(&stable_sigmoid);
  const Eigen::VectorXd n =
      (g.w_in * x + g.b_in +
       (r.array() * (g.w_hn * h + g.b_hn).array()).matrix())
          .array()
          .tanh();
  return n - (z.array() * n.array()).matrix() + (z.array() * h.array()).matrix();
}

const Eigen::MatrixXd& fetch(const ParamStore& p, const std::string& name) {
  const int i = p.find(name);
  if (i < 0) throw std::logic_error("missing parameter: " + name);
  return p.value(i);
}

int checked_category(double value, int cardinality, const char* what) {
  const double r = std::round(value);
  if (!std::isfinite(value) || r != value || r < 0.0 || r >= cardinality)
    throw std::domain_error(std::string(what) +
                            ": categorical value out of support");
  return static_cast<int>(r);
}

}  // namespace

double positive_transform(double raw) { return stable_softplus(raw) + 1e-12; }

Eigen::VectorXd CategoricalParams::probabilities() const {
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp();
  return p / p.sum();
}

double CategoricalParams::log_prob(int index) const {
  if (index < 0 || index >= logits.size())
    throw std::domain_error("categorical index out of support");
  return logits(index) - logsumexp(logits);
}

double GMMParams::log_density(double x) const {
  if (!std::isfinite(x)) throw std::domain_error("non-finite numerical value");
  Eigen::VectorXd terms(means.size());
  for (Eigen::Index j = 0; j < means.size(); ++j) {
    const double nd = (x - means(j)) / stds(j);
    terms(j) = std::log(weights(j)) - 0.5 * nd * nd - std::log(stds(j)) - kLogSqrt2Pi;
  }
  return logsumexp(terms);
}

double reshape_score(const Model& model, const Eigen::VectorXd& z) {
  const ParamStore& p = model.params();
  const Eigen::VectorXd h = (fetch(p, "dec.reshape.w") * z).cwiseMax(0.0);
  return (fetch(p, "dec.reshape.wf") * h)(0);
}

double product_score(const Model& model, const Eigen::VectorXd& z_src,
                     const Eigen::VectorXd& z_dst) {
  const ParamStore& p = model.params();
  const Eigen::VectorXd h = (fetch(p, "dec.product.w_src") * z_src +
                             fetch(p, "dec.product.w_dst") * z_dst)
                                .cwiseMax(0.0);
  return (fetch(p, "dec.product.wf") * h)(0);
}

Eigen::VectorXd merge_embeddings(const Model& model, const Eigen::VectorXd& z_src,
                                 const Eigen::VectorXd& z_dst) {
  const ParamStore& p = model.params();
  const Eigen::VectorXd h =
      ((fetch(p, "dec.merge.w_src") * z_src).cwiseMax(0.0) +
       (fetch(p, "dec.merge.w_dst") * z_dst).cwiseMax(0.0))
          .cwiseMax(0.0);
  return fetch(p, "dec.merge.wf") * h;
}

CategoricalParams source_distribution(const Model& model,
                                      const std::vector<Eigen::VectorXd>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("source_distribution: no candidates");
  CategoricalParams out;
  out.logits.resize(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i)
    out.logits(static_cast<Eigen::Index>(i)) = reshape_score(model, candidates[i]);
  return out;
}

CategoricalParams destination_distribution(
    const Model& model, const Eigen::VectorXd& z_src,
    const std::vector<Eigen::VectorXd>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("destination_distribution: no candidates");
  CategoricalParams out;
  out.logits.resize(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i)
    out.logits(static_cast<Eigen::Index>(i)) =
        product_score(model, z_src, candidates[i]);
  return out;
}

TimeMsgParams time_msg_params(const Model& model, const Eigen::VectorXd& h0,
                              const ObservedTail* observed) {
  const FeatureSchema& schema = model.schema();
  const int n = schema.size();
  if (n > 0 && observed == nullptr)
    throw std::invalid_argument("time_msg_params: observed tail required");
  if (observed && static_cast<int>(observed->features.size()) != n)
    throw std::invalid_argument("time_msg_params: feature count mismatch");
  if (observed && observed->delta < 0.0)
    throw std::domain_error("time_msg_params: negative delta");

  const ParamStore& p = model.params();
  const GruMats seq = fetch_gru(p, "dec.seq");
  const int m = model.config().gmm_components;

  TimeMsgParams out;
  Eigen::VectorXd h = gru_scalar(seq, fetch(p, "dec.start_token").col(0), h0);
  out.time.rate =
      positive_transform((fetch(p, "dec.time.w") * h + fetch(p, "dec.time.b").col(0))(0));

  for (int f = 0; f < n; ++f) {
    // Input for this step: realized delta before the first feature, the
    // realized previous feature afterwards.
    Eigen::VectorXd x;
    if (f == 0) {
      x = fetch(p, "dec.delta_embed.w").col(0) * observed->delta +
          fetch(p, "dec.delta_embed.b").col(0);
    } else {
      const FeatureDescriptor& prev = schema.features[f - 1];
      const std::string base = "dec.feat" + std::to_string(f - 1);
      if (prev.kind == FeatureKind::categorical) {
        const int idx = checked_category(observed->features[f - 1],
                                         prev.cardinality, "time_msg_params");
        x = fetch(p, base + ".embed").col(idx);
      } else {
        if (!std::isfinite(observed->features[f - 1]))
          throw std::domain_error("time_msg_params: non-finite numerical value");
        x = fetch(p, base + ".embed.w").col(0) * observed->features[f - 1] +
            fetch(p, base + ".embed.b").col(0);
      }
    }
    h = gru_scalar(seq, x, h);

    const std::string base = "dec.feat" + std::to_string(f);
    const Eigen::VectorXd raw =
        fetch(p, base + ".head.w") * h + fetch(p, base + ".head.b").col(0);
    if (schema.features[f].kind == FeatureKind::categorical) {
      out.feature_heads.emplace_back(CategoricalParams{raw});
    } else {
      out.feature_heads.emplace_back(gmm_from_raw(raw, m));
    }
  }
  return out;
}

double interaction_log_likelihood(const InteractionDistribution& dist,
                                  const ObservedInteraction& obs) {
  if (obs.delta < 0.0)
    throw std::domain_error("interaction_log_likelihood: negative delta");
  if (obs.features.size() != dist.tail.feature_heads.size())
    throw std::invalid_argument(
        "interaction_log_likelihood: feature count mismatch");

  double ll = dist.source.log_prob(obs.src_index) +
              dist.destination.log_prob(obs.dst_index);
  const double rate = dist.tail.time.rate;
  ll += std::log(rate) - rate * obs.delta;

  for (std::size_t f = 0; f < obs.features.size(); ++f) {
    const FeatureHeadParams& head = dist.tail.feature_heads[f];
    if (const auto* cat = std::get_if<CategoricalParams>(&head)) {
      const int idx = checked_category(obs.features[f],
                                       static_cast<int>(cat->logits.size()),
                                       "interaction_log_likelihood");
      ll += cat->log_prob(idx);
    } else {
      ll += std::get<GMMParams>(head).log_density(obs.features[f]);
    }
  }
  return ll;
}

GMMParams gmm_from_raw(const Eigen::VectorXd& raw, int components) {
  if (raw.size() != 3 * components)
    throw std::invalid_argument("gmm_from_raw: raw size mismatch");
  GMMParams g;
  g.means = raw.head(components);
  g.stds = raw.segment(components, components).unaryExpr(&positive_transform);
  const Eigen::VectorXd w = raw.tail(components);
  const double m = w.maxCoeff();
  Eigen::VectorXd e = (w.array() - m).exp();
  g.weights = e / e.sum();
  return g;
}

int sample_categorical(const CategoricalParams& params, Rng& rng) {
  const Eigen::VectorXd p = params.probabilities();
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

double sample_exponential(const ExponentialParam& param, Rng& rng) {
  return rng.exponential(param.rate);
}

double sample_gmm(const GMMParams& params, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Eigen::Index comp = params.weights.size() - 1;
  for (Eigen::Index i = 0; i < params.weights.size(); ++i) {
    acc += params.weights(i);
    if (u < acc) {
      comp = i;
      break;
    }
  }
  return rng.normal(params.means(comp), params.stds(comp));
}

// --- differentiable builders ---

ad::Var reshape_scores_row(ad::Tape& t, const ModelRefs& refs, ad::Var z) {
  return t.matmul(refs.resh_wf, t.relu(t.matmul(refs.resh_w, z)));
}

ad::Var destination_logit_matrix(ad::Tape& t, const ModelRefs& refs,
                                 ad::Var z_src, ad::Var z_cand) {
  return t.pairwise_relu_dot(t.matmul(refs.prod_wsrc, z_src),
                             t.matmul(refs.prod_wdst, z_cand), refs.prod_wf);
}

ad::Var merge_h0(ad::Tape& t, const ModelRefs& refs, ad::Var z_src, ad::Var z_dst) {
  const ad::Var h = t.relu(t.add(t.relu(t.matmul(refs.merge_wsrc, z_src)),
                                 t.relu(t.matmul(refs.merge_wdst, z_dst))));
  return t.matmul(refs.merge_wf, h);
}

namespace {

ad::Var positive_row(ad::Tape& t, ad::Var raw) {
  return t.add_scalar(t.softplus(raw), 1e-12);
}

// Input embedding for one decoder step from realized values.
ad::Var step_input(ad::Tape& t, const ModelRefs& refs, int feature,
                   const std::vector<double>& values) {
  const Eigen::Index B = static_cast<Eigen::Index>(values.size());
  if (feature < 0) {  // realized delta
    ad::Mat row(1, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      if (values[b] < 0.0) throw std::domain_error("decoder: negative delta");
      row(0, b) = values[b];
    }
    return t.add_col(t.matmul(refs.delta_embed_w, t.constant(std::move(row))),
                     refs.delta_embed_b);
  }
  const ModelRefs::FeatureIo& io = refs.feats[feature];
  if (io.categorical) {
    std::vector<int> idx(values.size());
    for (std::size_t b = 0; b < values.size(); ++b)
      idx[b] = checked_category(values[b], io.cardinality, "decoder");
    return t.gather_cols(io.embed_w, std::move(idx));
  }
  ad::Mat row(1, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    if (!std::isfinite(values[b]))
      throw std::domain_error("decoder: non-finite numerical value");
    row(0, b) = values[b];
  }
  return t.add_col(t.matmul(io.embed_w, t.constant(std::move(row))), io.embed_b);
}

}  // namespace

SeqHeads build_time_msg(ad::Tape& t, const Model& model, const ModelRefs& refs,
                        ad::Var h0, const RealizedBatch& realized) {
  const int n = model.schema().size();
  const Eigen::Index B = t.val(h0).cols();
  if (n > 0) {
    if (static_cast<Eigen::Index>(realized.deltas.size()) != B)
      throw std::invalid_argument("build_time_msg: delta count mismatch");
    if (static_cast<int>(realized.features.size()) != n)
      throw std::invalid_argument("build_time_msg: feature row count mismatch");
    for (const auto& rowv : realized.features)
      if (static_cast<Eigen::Index>(rowv.size()) != B)
        throw std::invalid_argument("build_time_msg: feature column mismatch");
  }

  SeqHeads out;
  const ad::Var start_rep =
      t.matmul(refs.start_token, t.constant(ad::Mat::Ones(1, B)));
  ad::Var h = gru_cell(t, refs.seq_gru, start_rep, h0);
  out.rate = positive_row(t, t.add_col(t.matmul(refs.time_head_w, h), refs.time_head_b));

  for (int f = 0; f < n; ++f) {
    const std::vector<double>& values =
        (f == 0) ? realized.deltas : realized.features[f - 1];
    h = gru_cell(t, refs.seq_gru, step_input(t, refs, f - 1, values), h);
    const ModelRefs::FeatureIo& io = refs.feats[f];
    out.raw.push_back(t.add_col(t.matmul(io.head_w, h), io.head_b));
  }
  return out;
}

ad::Var categorical_log_prob_row(ad::Tape& t, ad::Var logits,
                                 const std::vector<int>& indices) {
  return t.sub(t.pick_per_col(logits, indices), t.colwise_logsumexp(logits));
}

ad::Var gmm_log_density_row(ad::Tape& t, ad::Var raw, const std::vector<double>& x,
                            int components) {
  const Eigen::Index B = static_cast<Eigen::Index>(x.size());
  const ad::Var mu = t.slice_rows(raw, 0, components);
  const ad::Var sigma = positive_row(t, t.slice_rows(raw, components, components));
  const ad::Var wraw = t.slice_rows(raw, 2 * components, components);
  const ad::Var logw = t.sub_rowvec(wraw, t.colwise_logsumexp(wraw));

  ad::Mat xs(components, B);
  for (Eigen::Index b = 0; b < B; ++b) xs.col(b).setConstant(x[b]);
  const ad::Var nd = t.cdiv(t.sub(t.constant(std::move(xs)), mu), sigma);
  const ad::Var comp = t.add_scalar(
      t.sub(t.scale(t.cmul(nd, nd), -0.5), t.log_(sigma)), -kLogSqrt2Pi);
  return t.colwise_logsumexp(t.add(logw, comp));
}

SampledTail sample_time_msg(const Model& model, const ModelRefs& refs,
                            ad::Tape& t, ad::Var h0, Rng& rng) {
  const FeatureSchema& schema = model.schema();
  const int n = schema.size();
  const Eigen::Index B = t.val(h0).cols();
  const int m = model.config().gmm_components;

  SampledTail out;
  const ad::Var start_rep =
      t.matmul(refs.start_token, t.constant(ad::Mat::Ones(1, B)));
  ad::Var h = gru_cell(t, refs.seq_gru, start_rep, h0);
  const ad::Mat rate =
      t.val(positive_row(t, t.add_col(t.matmul(refs.time_head_w, h), refs.time_head_b)));
  out.deltas.resize(B);
  for (Eigen::Index b = 0; b < B; ++b)
    out.deltas[b] = rng.exponential(rate(0, b));

  out.features.resize(n);
  for (int f = 0; f < n; ++f) {
    const std::vector<double>& prev = (f == 0) ? out.deltas : out.features[f - 1];
    h = gru_cell(t, refs.seq_gru, step_input(t, refs, f - 1, prev), h);
    const ModelRefs::FeatureIo& io = refs.feats[f];
    const ad::Mat raw = t.val(t.add_col(t.matmul(io.head_w, h), io.head_b));
    out.features[f].resize(B);
    for (Eigen::Index b = 0; b < B; ++b) {
      if (io.categorical) {
        CategoricalParams cat{raw.col(b)};
        out.features[f][b] = static_cast<double>(sample_categorical(cat, rng));
      } else {
        out.features[f][b] = sample_gmm(gmm_from_raw(raw.col(b), m), rng);
      }
    }
  }
  return out;
}

}  // namespace dggen
