// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/toy.hpp"

#include <cmath>
#include <stdexcept>

#include "dggen/rng.hpp"

namespace dggen {

namespace {

void check_pmf(const std::vector<double>& pmf, const char* what) {
  if (pmf.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  double sum = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + " has negative mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + " does not sum to 1");
}

int draw_from_pmf(const std::vector<double>& pmf, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(pmf.size()) - 1;
}

}  // namespace

void ToyConfig::validate() const {
  if (n_src_nodes < 1 || n_dst_nodes < 1)
    throw std::invalid_argument("toy config: node counts must be positive");
  if (n_dst_blocks < 1 || n_dst_nodes % n_dst_blocks != 0)
    throw std::invalid_argument(
        "toy config: destination count must divide evenly into blocks");
  if (n_events < 1) throw std::invalid_argument("toy config: n_events must be positive");
  if (!(rate > 0.0)) throw std::invalid_argument("toy config: rate must be positive");
  if (!(prefer_prob >= 0.0 && prefer_prob <= 1.0))
    throw std::invalid_argument("toy config: prefer_prob must lie in [0,1]");
  check_pmf(cat_pmf_even, "toy config: even-block pmf");
  check_pmf(cat_pmf_odd, "toy config: odd-block pmf");
  check_pmf(gmm_weights, "toy config: mixture weights");
  if (cat_pmf_even.size() != cat_pmf_odd.size())
    throw std::invalid_argument("toy config: block pmfs must share a cardinality");
  if (gmm_means.size() != gmm_stds.size() ||
      gmm_means.size() != gmm_weights.size() || gmm_means.empty())
    throw std::invalid_argument("toy config: mixture spec lengths disagree");
  for (double s : gmm_stds)
    if (!(s > 0.0))
      throw std::invalid_argument("toy config: mixture stds must be positive");
}

FeatureSchema toy_schema(const ToyConfig& config) {
  FeatureSchema schema;
  FeatureDescriptor cat;
  cat.name = "f0";
  cat.kind = FeatureKind::categorical;
  cat.cardinality = static_cast<int>(config.cat_pmf_even.size());
  FeatureDescriptor num;
  num.name = "f1";
  num.kind = FeatureKind::numerical;
  schema.features = {cat, num};
  return schema;
}

EventStream make_toy(const ToyConfig& config) {
  config.validate();
  Rng rng = Rng::stream(config.seed, "data");

  const int block_size = config.n_dst_nodes / config.n_dst_blocks;
  std::vector<Interaction> events;
  events.reserve(static_cast<std::size_t>(config.n_events));
  double t = 0.0;
  for (long long i = 0; i < config.n_events; ++i) {
    Interaction ev;
    ev.src = static_cast<int>(rng.uniform_below(config.n_src_nodes));

    // Each source prefers the block its own id maps onto.
    const int preferred = ev.src % config.n_dst_blocks;
    int block = preferred;
    if (config.n_dst_blocks > 1 && rng.uniform() >= config.prefer_prob) {
      block = static_cast<int>(rng.uniform_below(config.n_dst_blocks - 1));
      if (block >= preferred) ++block;
    }
    ev.dst = config.n_src_nodes + block * block_size +
             static_cast<int>(rng.uniform_below(block_size));

    t += rng.exponential(config.rate);
    ev.t = t;

    const std::vector<double>& pmf =
        block % 2 == 0 ? config.cat_pmf_even : config.cat_pmf_odd;
    const int category = draw_from_pmf(pmf, rng);
    const int component = draw_from_pmf(config.gmm_weights, rng);
    const double value = rng.normal(config.gmm_means[component],
                                    config.gmm_stds[component]);
    ev.features = {static_cast<double>(category), value};
    events.push_back(std::move(ev));
  }

  return EventStream(toy_schema(config), config.n_src_nodes + config.n_dst_nodes,
                     0.0, std::move(events));
}

}  // namespace dggen
