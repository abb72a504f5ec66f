// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "dggen/encoder.hpp"

namespace dggen {

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Right-open bins, last bin closed; out-of-range clamps into the end bins.
int bin_index(double value, const std::vector<double>& edges) {
  const int n = static_cast<int>(edges.size()) - 1;
  if (value <= edges.front()) return 0;
  if (value >= edges.back()) return n - 1;
  const int k = static_cast<int>(
                    std::upper_bound(edges.begin(), edges.end(), value) -
                    edges.begin()) -
                1;
  return std::min(k, n - 1);
}

double population_std(const std::vector<double>& xs, double mean) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

}  // namespace

std::vector<StaticGraph> discretize(const EventStream& stream, int n_bins) {
  if (stream.empty()) throw std::invalid_argument("discretize: empty stream");
  if (n_bins < 1) throw std::invalid_argument("discretize: n_bins must be positive");

  const std::vector<Interaction>& events = stream.interactions();
  const double t_min = events.front().t;
  const double width = (events.back().t - t_min) / n_bins;

  std::vector<std::set<std::pair<int, int>>> edge_sets(n_bins);
  for (const Interaction& ev : events) {
    if (ev.src == ev.dst) continue;  // simple graphs carry no loops
    const int k =
        width > 0.0
            ? std::min(n_bins - 1, static_cast<int>((ev.t - t_min) / width))
            : 0;
    edge_sets[k].insert(std::minmax(ev.src, ev.dst));
  }

  std::vector<StaticGraph> out(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    std::set<int> nodes;
    for (const auto& [u, v] : edge_sets[k]) {
      nodes.insert(u);
      nodes.insert(v);
    }
    out[k].nodes.assign(nodes.begin(), nodes.end());
    out[k].edges.assign(edge_sets[k].begin(), edge_sets[k].end());
  }
  return out;
}

SnapshotStats graph_stats(const StaticGraph& graph) {
  SnapshotStats s;
  const int n = static_cast<int>(graph.nodes.size());
  if (n == 0) return s;

  std::unordered_map<int, int> index;
  index.reserve(graph.nodes.size());
  for (int i = 0; i < n; ++i) index.emplace(graph.nodes[i], i);

  std::vector<std::vector<int>> adj(n);
  for (const auto& [u, v] : graph.edges) {
    const int a = index.at(u);
    const int b = index.at(v);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  s.md = 2.0 * static_cast<double>(graph.edges.size()) / n;

  double log_sum = 0.0;
  int deg_nodes = 0;
  for (int i = 0; i < n; ++i) {
    const double d = static_cast<double>(adj[i].size());
    s.wc += d * (d - 1.0) / 2.0;
    if (d >= 1.0) {
      log_sum += std::log(d / 0.5);
      ++deg_nodes;
    }
  }
  s.ple = log_sum > 0.0 ? 1.0 + static_cast<double>(deg_nodes) / log_sum : 0.0;

  // One BFS per node covers components, reach counts, and distance sums.
  std::vector<int> component(n, -1);
  std::vector<int> dist(n);
  double closeness_sum = 0.0;
  for (int start = 0; start < n; ++start) {
    if (component[start] < 0) {
      component[start] = start;
      std::queue<int> frontier;
      frontier.push(start);
      while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[u]) {
          if (component[v] < 0) {
            component[v] = start;
            frontier.push(v);
          }
        }
      }
      s.nc += 1.0;
    }

    std::fill(dist.begin(), dist.end(), -1);
    dist[start] = 0;
    std::queue<int> frontier;
    frontier.push(start);
    long long reach = 0, dist_sum = 0;
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          reach += 1;
          dist_sum += dist[v];
          frontier.push(v);
        }
      }
    }
    if (reach > 0 && n > 1) {
      const double r = static_cast<double>(reach);
      closeness_sum += (r / static_cast<double>(dist_sum)) * (r / (n - 1.0));
    }
  }
  s.cc = closeness_sum / n;
  return s;
}

SnapshotStats median_abs_error(const std::vector<SnapshotStats>& real_stats,
                               const std::vector<SnapshotStats>& synth_stats) {
  if (real_stats.size() != synth_stats.size())
    throw std::invalid_argument("median_abs_error: snapshot count mismatch");
  if (real_stats.empty())
    throw std::invalid_argument("median_abs_error: empty snapshot lists");

  auto per_metric = [&](double SnapshotStats::* field) {
    std::vector<double> diffs;
    diffs.reserve(real_stats.size());
    for (std::size_t k = 0; k < real_stats.size(); ++k)
      diffs.push_back(std::abs(real_stats[k].*field - synth_stats[k].*field));
    return median_of(std::move(diffs));
  };

  SnapshotStats mae;
  mae.cc = per_metric(&SnapshotStats::cc);
  mae.md = per_metric(&SnapshotStats::md);
  mae.nc = per_metric(&SnapshotStats::nc);
  mae.ple = per_metric(&SnapshotStats::ple);
  mae.wc = per_metric(&SnapshotStats::wc);
  return mae;
}

Eigen::MatrixXd Histogram::pmf() const {
  const double t = total();
  if (!(t > 0.0)) throw std::domain_error("histogram: cannot normalize zero total");
  return counts / t;
}

std::vector<double> uniform_edges(double lo, double hi, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("uniform_edges: n_bins must be positive");
  if (!(hi > lo)) {  // degenerate range (constant feature): widen symmetrically
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i)
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / n_bins;
  return edges;
}

Histogram feature_histogram(const EventStream& stream, int feature,
                            const std::vector<double>& edges) {
  if (feature < 0 || feature >= stream.schema().size())
    throw std::invalid_argument("feature_histogram: feature index out of range");
  Histogram h;
  h.x_edges = edges;
  h.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edges.size()) - 1, 1);
  for (const Interaction& ev : stream.interactions())
    h.counts(bin_index(ev.features[feature], edges), 0) += 1.0;
  return h;
}

Histogram pair_histogram(const EventStream& stream, int feature_x, int feature_y,
                         const std::vector<double>& x_edges,
                         const std::vector<double>& y_edges) {
  const int n_feat = stream.schema().size();
  if (feature_x < 0 || feature_x >= n_feat || feature_y < 0 || feature_y >= n_feat)
    throw std::invalid_argument("pair_histogram: feature index out of range");
  Histogram h;
  h.x_edges = x_edges;
  h.y_edges = y_edges;
  h.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x_edges.size()) - 1,
                                   static_cast<Eigen::Index>(y_edges.size()) - 1);
  for (const Interaction& ev : stream.interactions())
    h.counts(bin_index(ev.features[feature_x], x_edges),
             bin_index(ev.features[feature_y], y_edges)) += 1.0;
  return h;
}

double js_distance(const Histogram& p, const Histogram& q) {
  if (p.x_edges != q.x_edges || p.y_edges != q.y_edges)
    throw std::invalid_argument("js_distance: histograms use different binning");
  const Eigen::MatrixXd pm = p.pmf();
  const Eigen::MatrixXd qm = q.pmf();

  double jsd = 0.0;
  for (Eigen::Index j = 0; j < pm.cols(); ++j) {
    for (Eigen::Index i = 0; i < pm.rows(); ++i) {
      const double a = pm(i, j);
      const double b = qm(i, j);
      const double m = 0.5 * (a + b);
      // One temp per cell keeps the sum bitwise symmetric in (p, q).
      const double cell = (a > 0.0 ? 0.5 * a * std::log2(a / m) : 0.0) +
                          (b > 0.0 ? 0.5 * b * std::log2(b / m) : 0.0);
      jsd += cell;
    }
  }
  return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

double edge_overlap(const EventStream& source, const EventStream& synth) {
  if (source.empty()) throw std::invalid_argument("edge_overlap: empty source");
  std::vector<std::tuple<int, int, double>> triples;
  triples.reserve(synth.size());
  for (const Interaction& ev : synth.interactions())
    triples.emplace_back(ev.src, ev.dst, ev.t);
  std::sort(triples.begin(), triples.end());

  long long matched = 0;
  for (const Interaction& ev : source.interactions()) {
    if (std::binary_search(triples.begin(), triples.end(),
                           std::make_tuple(ev.src, ev.dst, ev.t)))
      ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(source.size());
}

double average_precision(const std::vector<int>& labels,
                         const std::vector<double>& scores) {
  if (labels.size() != scores.size())
    throw std::invalid_argument("average_precision: length mismatch");
  const long long positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0)
    throw std::invalid_argument("average_precision: no positive labels");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];  // ties keep original index order
  });

  double sum = 0.0;
  long long hits = 0;
  for (std::size_t rank = 1; rank <= order.size(); ++rank) {
    if (labels[order[rank - 1]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return sum / static_cast<double>(positives);
}

double auroc(const std::vector<int>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size())
    throw std::invalid_argument("auroc: length mismatch");
  const long long positives = std::count(labels.begin(), labels.end(), 1);
  const long long negatives = static_cast<long long>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw std::invalid_argument("auroc: needs both classes");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Midranks make tied pairs count exactly one half.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

namespace {

// Shared skeleton of the two negative-sampling protocols; they differ only
// in whether destinations already paired with the source are excluded.
LabeledQueries sample_negatives(const EventStream& train,
                                const EventStream& test, Rng& rng,
                                bool unseen_only, const char* what) {
  if (train.num_nodes() != test.num_nodes())
    throw std::invalid_argument(std::string(what) +
                                ": streams disagree on the node universe");
  if (train.empty() || test.empty())
    throw std::invalid_argument(std::string(what) + ": empty stream");

  std::set<int> dst_set;
  std::set<std::pair<int, int>> train_pairs;
  for (const Interaction& ev : train.interactions()) {
    dst_set.insert(ev.dst);
    if (unseen_only) train_pairs.insert({ev.src, ev.dst});
  }
  const std::vector<int> destinations(dst_set.begin(), dst_set.end());

  LabeledQueries out;
  std::vector<int> eligible;
  const std::vector<Interaction>& events = test.interactions();
  for (std::size_t e = 0; e < events.size(); ++e) {
    const Interaction& ev = events[e];
    eligible.clear();
    for (int d : destinations) {
      if (d == ev.dst) continue;
      if (unseen_only && train_pairs.find({ev.src, d}) != train_pairs.end())
        continue;
      eligible.push_back(d);
    }
    if (eligible.empty()) {
      ++out.skipped;
      continue;
    }
    const int neg = eligible[rng.uniform_below(eligible.size())];
    out.queries.push_back({ev.src, ev.dst, ev.t});
    out.labels.push_back(1);
    out.event_index.push_back(e);
    out.queries.push_back({ev.src, neg, ev.t});
    out.labels.push_back(0);
    out.event_index.push_back(e);
  }
  return out;
}

}  // namespace

LabeledQueries inductive_negative_sampling(const EventStream& train,
                                           const EventStream& test, Rng& rng) {
  return sample_negatives(train, test, rng, true,
                          "inductive_negative_sampling");
}

LabeledQueries standard_negative_sampling(const EventStream& train,
                                          const EventStream& test, Rng& rng) {
  return sample_negatives(train, test, rng, false,
                          "standard_negative_sampling");
}

LinkPredictionResult link_prediction(const Model& model, NodeStates states,
                                     const EventStream& train,
                                     const EventStream& test, std::uint64_t seed,
                                     int batch_size, NegativeSampling sampling) {
  if (batch_size < 1)
    throw std::invalid_argument("link_prediction: batch_size must be positive");
  Rng rng = Rng::stream(seed, "linkpred");
  const LabeledQueries lq = sampling == NegativeSampling::inductive
                                ? inductive_negative_sampling(train, test, rng)
                                : standard_negative_sampling(train, test, rng);
  if (lq.queries.empty())
    throw std::runtime_error(
        "link prediction: every test positive was skipped (no unseen "
        "destinations to sample)");

  // Queries of a chunk are scored against the pre-chunk state, then the
  // chunk's events are folded into the memory.
  std::vector<double> scores;
  scores.reserve(lq.queries.size());
  const std::vector<Interaction>& events = test.interactions();
  std::size_t cursor = 0;
  for (std::size_t at = 0; at < events.size();
       at += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(events.size(), at + static_cast<std::size_t>(batch_size));
    std::size_t stop = cursor;
    while (stop < lq.event_index.size() && lq.event_index[stop] < end) ++stop;
    if (stop > cursor) {
      const std::vector<LinkQuery> chunk(lq.queries.begin() + cursor,
                                         lq.queries.begin() + stop);
      const std::vector<double> s = score_links(model, states, chunk);
      scores.insert(scores.end(), s.begin(), s.end());
      cursor = stop;
    }
    update_memory(model, states,
                  std::span(events).subspan(at, end - at));
  }

  // Raw pair scores are softmax logits: comparable within one event's
  // candidate set, not across events.  Normalize each positive/negative
  // pair (same src, same time) into conditional probabilities so the
  // pooled ranking compares calibrated values.
  std::unordered_map<std::size_t, std::size_t> first_at;
  first_at.reserve(lq.queries.size());
  std::vector<double> calibrated(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto [it, fresh] = first_at.emplace(lq.event_index[i], i);
    if (fresh) continue;
    const std::size_t j = it->second;
    const std::size_t pos = lq.labels[j] == 1 ? j : i;
    const std::size_t neg = lq.labels[j] == 1 ? i : j;
    const double p = 1.0 / (1.0 + std::exp(scores[neg] - scores[pos]));
    calibrated[pos] = p;
    calibrated[neg] = 1.0 - p;
  }

  LinkPredictionResult result;
  result.ap = average_precision(lq.labels, calibrated);
  result.auroc = auroc(lq.labels, calibrated);
  result.skipped = lq.skipped;
  result.num_queries = lq.queries.size();
  return result;
}

FidelityReport evaluate_fidelity(const EventStream& real, const EventStream& synth,
                                 int n_snapshots, int bins_1d, int bins_2d) {
  if (real.schema() != synth.schema())
    throw std::invalid_argument("evaluate_fidelity: schema mismatch");
  if (real.empty() || synth.empty())
    throw std::invalid_argument("evaluate_fidelity: empty stream");

  FidelityReport report;
  for (const StaticGraph& g : discretize(real, n_snapshots))
    report.real_stats.push_back(graph_stats(g));
  for (const StaticGraph& g : discretize(synth, n_snapshots))
    report.synth_stats.push_back(graph_stats(g));
  report.mae = median_abs_error(report.real_stats, report.synth_stats);
  for (const SnapshotStats& s : report.real_stats) report.real_mean_md += s.md;
  report.real_mean_md /= static_cast<double>(report.real_stats.size());

  // Shared binning: categorical features get one bin per category; numerical
  // features span the union of both streams' observed ranges.
  const FeatureSchema& schema = real.schema();
  const int n_feat = schema.size();
  auto edges_for = [&](int f, int numeric_bins) {
    if (schema.features[f].kind == FeatureKind::categorical) {
      return uniform_edges(0.0, schema.features[f].cardinality,
                           schema.features[f].cardinality);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Interaction& ev : real.interactions()) {
      lo = std::min(lo, ev.features[f]);
      hi = std::max(hi, ev.features[f]);
    }
    for (const Interaction& ev : synth.interactions()) {
      lo = std::min(lo, ev.features[f]);
      hi = std::max(hi, ev.features[f]);
    }
    return uniform_edges(lo, hi, numeric_bins);
  };

  for (int f = 0; f < n_feat; ++f) {
    const std::vector<double> edges = edges_for(f, bins_1d);
    report.real_hist.push_back(feature_histogram(real, f, edges));
    report.synth_hist.push_back(feature_histogram(synth, f, edges));
    report.js_single.push_back(
        js_distance(report.real_hist.back(), report.synth_hist.back()));
  }
  for (int i = 0; i < n_feat; ++i) {
    for (int j = i + 1; j < n_feat; ++j) {
      const std::vector<double> xe = edges_for(i, bins_2d);
      const std::vector<double> ye = edges_for(j, bins_2d);
      report.pair_index.emplace_back(i, j);
      report.js_pairs.push_back(js_distance(pair_histogram(real, i, j, xe, ye),
                                            pair_histogram(synth, i, j, xe, ye)));
    }
  }
  report.js_single_mean = mean_of(report.js_single);
  report.js_single_std = population_std(report.js_single, report.js_single_mean);
  report.js_pairs_mean = mean_of(report.js_pairs);
  report.js_pairs_std = population_std(report.js_pairs, report.js_pairs_mean);

  report.overlap = edge_overlap(real, synth);
  return report;
}

}  // namespace dggen
