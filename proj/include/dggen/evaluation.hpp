// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dggen/event_store.hpp"
#include "dggen/generator.hpp"
#include "dggen/model.hpp"
#include "dggen/rng.hpp"

namespace dggen {

// Undirected simple graph: one time-bin snapshot of a stream.  Nodes are
// the ids incident to at least one edge; edges are unique pairs with u < v.
struct StaticGraph {
  std::vector<int> nodes;
  std::vector<std::pair<int, int>> edges;
};

struct SnapshotStats {
  double cc = 0.0;   // mean component-scaled closeness centrality
  double md = 0.0;   // mean degree 2|E|/|V|
  double nc = 0.0;   // connected component count
  double ple = 0.0;  // continuous-MLE power-law exponent of the degrees
  double wc = 0.0;   // wedge count sum_v C(deg v, 2)
};

// Splits [t_min, t_max] into n_bins equal-width intervals (last one closed)
// and collapses each interval's interactions into an undirected simple
// graph.  Self loops are dropped; parallel interactions collapse.
std::vector<StaticGraph> discretize(const EventStream& stream, int n_bins);

// All five statistics of one snapshot.  The empty graph yields all zeros.
SnapshotStats graph_stats(const StaticGraph& graph);

// Per-metric median of |real_k - synth_k| over paired snapshots.
SnapshotStats median_abs_error(const std::vector<SnapshotStats>& real_stats,
                               const std::vector<SnapshotStats>& synth_stats);

// Count histogram over fixed bins; 1D when y_edges is empty, else a 2D grid.
// Bins are right-open except the last, which is closed; out-of-range values
// clamp into the end bins.
struct Histogram {
  std::vector<double> x_edges;  // size nx + 1
  std::vector<double> y_edges;  // empty for 1D, else size ny + 1
  Eigen::MatrixXd counts;       // [nx x ny], ny = 1 for 1D

  bool is_2d() const { return !y_edges.empty(); }
  double total() const { return counts.sum(); }
  Eigen::MatrixXd pmf() const;  // counts / total; requires total > 0
};

// Evenly spaced edges over [lo, hi]; categorical features use integer edges
// 0..cardinality via n_bins = cardinality, lo = 0, hi = cardinality.
std::vector<double> uniform_edges(double lo, double hi, int n_bins);

// Histogram of one feature column (1D) or one feature pair (2D) of a stream.
Histogram feature_histogram(const EventStream& stream, int feature,
                            const std::vector<double>& edges);
Histogram pair_histogram(const EventStream& stream, int feature_x, int feature_y,
                         const std::vector<double>& x_edges,
                         const std::vector<double>& y_edges);

// Jensen-Shannon distance: sqrt of the base-2 JS divergence of the two
// histograms' normalized masses.  Requires identical binning, totals > 0.
double js_distance(const Histogram& p, const Histogram& q);

// Fraction of `source` (src, dst, t) triples that also appear in `synth`.
double edge_overlap(const EventStream& source, const EventStream& synth);

// Ranking metrics.  Ties in average_precision resolve by original index;
// auroc scores ties as one half (midrank form).
double average_precision(const std::vector<int>& labels,
                         const std::vector<double>& scores);
double auroc(const std::vector<int>& labels, const std::vector<double>& scores);

// One positive test query plus one negative whose destination the source
// never met in training; labels align with queries.
struct LabeledQueries {
  std::vector<LinkQuery> queries;
  std::vector<int> labels;
  std::vector<std::size_t> event_index;  // originating test-event position
  long long skipped = 0;  // positives dropped for lack of an eligible negative
};

LabeledQueries inductive_negative_sampling(const EventStream& train,
                                           const EventStream& test, Rng& rng);

// Baseline protocol: the negative destination is drawn uniformly from every
// training destination other than the positive's own; no unseen-pair filter.
LabeledQueries standard_negative_sampling(const EventStream& train,
                                          const EventStream& test, Rng& rng);

enum class NegativeSampling { inductive, standard };

// Streaming link-prediction protocol: score each test chunk against the
// current encoder state, then fold the chunk into the state.
struct LinkPredictionResult {
  double ap = 0.0;
  double auroc = 0.0;
  long long skipped = 0;
  std::size_t num_queries = 0;
};

LinkPredictionResult link_prediction(
    const Model& model, NodeStates states, const EventStream& train,
    const EventStream& test, std::uint64_t seed, int batch_size = 200,
    NegativeSampling sampling = NegativeSampling::inductive);

// Full fidelity comparison of a synthetic stream against a reference stream:
// snapshot-statistic medians, per-feature and per-pair JS distances over
// shared binning, and the exact-triple overlap fraction.
struct FidelityReport {
  SnapshotStats mae;                 // per-metric median absolute error
  std::vector<SnapshotStats> real_stats;
  std::vector<SnapshotStats> synth_stats;
  double real_mean_md = 0.0;         // mean of per-snapshot real md
  std::vector<double> js_single;     // per feature, schema order
  std::vector<std::pair<int, int>> pair_index;  // feature pairs, i < j
  std::vector<double> js_pairs;      // aligned with pair_index
  double js_single_mean = 0.0, js_single_std = 0.0;  // population std
  double js_pairs_mean = 0.0, js_pairs_std = 0.0;
  double overlap = 0.0;
  std::vector<Histogram> real_hist, synth_hist;  // shared-binning 1D histograms
};

FidelityReport evaluate_fidelity(const EventStream& real, const EventStream& synth,
                                 int n_snapshots = 10, int bins_1d = 100,
                                 int bins_2d = 50);

}  // namespace dggen
