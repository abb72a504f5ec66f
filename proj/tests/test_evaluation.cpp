// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dggen/encoder.hpp"
#include "dggen/event_store.hpp"
#include "dggen/rng.hpp"

namespace dggen {
namespace {

EventStream stream_of(std::vector<Interaction> events, int num_nodes,
                      const char* schema = "", double origin = 0.0) {
  return EventStream(FeatureSchema::parse(schema), num_nodes, origin,
                     std::move(events));
}

EventStream random_stream(int n_events, int num_nodes, std::uint64_t seed,
                          const char* schema_spec = "cat:3,num") {
  const FeatureSchema schema = FeatureSchema::parse(schema_spec);
  Rng rng(seed);
  std::vector<Interaction> events;
  events.reserve(static_cast<std::size_t>(n_events));
  double t = 0.0;
  for (int i = 0; i < n_events; ++i) {
    Interaction ev;
    ev.src = static_cast<int>(rng.uniform_below(num_nodes));
    ev.dst = static_cast<int>(rng.uniform_below(num_nodes));
    t += rng.exponential(1.0);
    ev.t = t;
    for (const FeatureDescriptor& f : schema.features) {
      if (f.kind == FeatureKind::categorical)
        ev.features.push_back(
            static_cast<double>(rng.uniform_below(f.cardinality)));
      else
        ev.features.push_back(rng.normal(0.0, 1.0));
    }
    events.push_back(std::move(ev));
  }
  return EventStream(schema, num_nodes, 0.0, std::move(events));
}

StaticGraph graph_of(const std::set<std::pair<int, int>>& edges) {
  StaticGraph g;
  std::set<int> nodes;
  for (const auto& [u, v] : edges) {
    nodes.insert(u);
    nodes.insert(v);
  }
  g.nodes.assign(nodes.begin(), nodes.end());
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

TEST(DiscretizeTest, BoundaryRuleSplitsThreeEvents) {
  const EventStream s = stream_of(
      {{0, 1, 0.1, {}}, {1, 2, 0.5, {}}, {2, 3, 0.9, {}}}, 4, "", 0.1);
  const std::vector<StaticGraph> snaps = discretize(s, 2);
  ASSERT_EQ(snaps.size(), 2u);
  // Right-open first bin [0.1, 0.5) holds one event; closed last bin
  // [0.5, 0.9] holds two.
  ASSERT_EQ(snaps[0].edges.size(), 1u);
  EXPECT_EQ(snaps[0].edges[0], (std::pair<int, int>{0, 1}));
  ASSERT_EQ(snaps[1].edges.size(), 2u);
  EXPECT_EQ(snaps[1].edges[0], (std::pair<int, int>{1, 2}));
  EXPECT_EQ(snaps[1].edges[1], (std::pair<int, int>{2, 3}));
}

TEST(DiscretizeTest, SingleBinCollapsesTheWholeStream) {
  const EventStream s = stream_of(
      {{0, 1, 0.0, {}}, {1, 0, 1.0, {}}, {2, 3, 2.0, {}}, {0, 1, 3.0, {}}}, 4);
  const std::vector<StaticGraph> snaps = discretize(s, 1);
  ASSERT_EQ(snaps.size(), 1u);
  // Parallel and reversed interactions collapse to one undirected edge.
  EXPECT_EQ(snaps[0].edges,
            (std::vector<std::pair<int, int>>{{0, 1}, {2, 3}}));
  EXPECT_EQ(snaps[0].nodes, (std::vector<int>{0, 1, 2, 3}));
}

TEST(DiscretizeTest, SingleEventLandsInExactlyOneBin) {
  const EventStream s = stream_of({{4, 2, 5.0, {}}}, 6, "", 5.0);
  for (int n_bins : {1, 2, 7}) {
    const std::vector<StaticGraph> snaps = discretize(s, n_bins);
    ASSERT_EQ(snaps.size(), static_cast<std::size_t>(n_bins));
    std::size_t total_edges = 0;
    for (const StaticGraph& g : snaps) total_edges += g.edges.size();
    EXPECT_EQ(total_edges, 1u);
    EXPECT_EQ(snaps[0].edges, (std::vector<std::pair<int, int>>{{2, 4}}));
  }
}

TEST(DiscretizeTest, DropsSelfLoops) {
  const EventStream s =
      stream_of({{1, 1, 0.0, {}}, {2, 3, 0.5, {}}, {1, 1, 1.0, {}}}, 4);
  const std::vector<StaticGraph> snaps = discretize(s, 1);
  EXPECT_EQ(snaps[0].edges, (std::vector<std::pair<int, int>>{{2, 3}}));
  EXPECT_EQ(snaps[0].nodes, (std::vector<int>{2, 3}));
}

TEST(DiscretizeTest, RejectsEmptyStreamAndBadBinCount) {
  const EventStream empty = stream_of({}, 3);
  EXPECT_THROW(discretize(empty, 2), std::invalid_argument);
  const EventStream s = stream_of({{0, 1, 0.0, {}}}, 2);
  EXPECT_THROW(discretize(s, 0), std::invalid_argument);
}

TEST(GraphStatsTest, TriangleValues) {
  const SnapshotStats s = graph_stats(graph_of({{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_DOUBLE_EQ(s.md, 2.0);
  EXPECT_DOUBLE_EQ(s.wc, 3.0);
  EXPECT_DOUBLE_EQ(s.nc, 1.0);
  EXPECT_DOUBLE_EQ(s.cc, 1.0);
  EXPECT_NEAR(s.ple, 1.0 + 3.0 / (3.0 * std::log(4.0)), 1e-12);
}

TEST(GraphStatsTest, ThreeNodePathValues) {
  const SnapshotStats s = graph_stats(graph_of({{0, 1}, {1, 2}}));
  EXPECT_NEAR(s.md, 4.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.wc, 1.0);
  EXPECT_DOUBLE_EQ(s.nc, 1.0);
  // Ends: (2/3)·(2/2); center: (2/2)·(2/2).  Mean = 7/9.
  EXPECT_NEAR(s.cc, 7.0 / 9.0, 1e-15);
}

TEST(GraphStatsTest, TwoDisjointEdgesValues) {
  const SnapshotStats s = graph_stats(graph_of({{0, 1}, {2, 3}}));
  EXPECT_DOUBLE_EQ(s.nc, 2.0);
  EXPECT_DOUBLE_EQ(s.md, 1.0);
  EXPECT_DOUBLE_EQ(s.wc, 0.0);
  // Each node reaches one peer at distance one: (1/1)·(1/3) each.
  EXPECT_NEAR(s.cc, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.ple, 1.0 + 1.0 / std::log(2.0), 1e-12);
}

TEST(GraphStatsTest, EmptyGraphIsAllZeros) {
  const SnapshotStats s = graph_stats(StaticGraph{});
  EXPECT_EQ(s.md, 0.0);
  EXPECT_EQ(s.wc, 0.0);
  EXPECT_EQ(s.nc, 0.0);
  EXPECT_EQ(s.cc, 0.0);
  EXPECT_EQ(s.ple, 0.0);
}

TEST(GraphStatsTest, MatchesBruteForceOnRandomGraphs) {
  Rng rng(424242);
  int tested = 0;
  while (tested < 50) {
    const int n_ids = 2 + static_cast<int>(rng.uniform_below(29));  // 2..30
    const double p = 0.05 + 0.45 * rng.uniform();
    std::set<std::pair<int, int>> edges;
    for (int u = 0; u < n_ids; ++u)
      for (int v = u + 1; v < n_ids; ++v)
        if (rng.uniform() < p) edges.insert({u, v});
    if (edges.empty()) continue;
    ++tested;
    const StaticGraph g = graph_of(edges);
    const SnapshotStats got = graph_stats(g);

    const int n = static_cast<int>(g.nodes.size());
    std::map<int, int> idx;
    for (int i = 0; i < n; ++i) idx[g.nodes[i]] = i;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (const auto& [u, v] : g.edges)
      adj[idx[u]][idx[v]] = adj[idx[v]][idx[u]] = true;

    EXPECT_DOUBLE_EQ(got.md,
                     2.0 * static_cast<double>(edges.size()) / n);

    long long wedges = 0;  // exhaustive triple enumeration
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          if (a != c && b != c && adj[c][a] && adj[c][b]) ++wedges;
    EXPECT_EQ(got.wc, static_cast<double>(wedges));

    std::vector<int> parent(n);  // components via union-find
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [u, v] : g.edges) parent[find(idx[u])] = find(idx[v]);
    std::set<int> roots;
    for (int i = 0; i < n; ++i) roots.insert(find(i));
    EXPECT_EQ(got.nc, static_cast<double>(roots.size()));

    const int kInf = 1 << 20;  // closeness via Floyd-Warshall
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, kInf));
    for (int i = 0; i < n; ++i) dist[i][i] = 0;
    for (const auto& [u, v] : g.edges) dist[idx[u]][idx[v]] = dist[idx[v]][idx[u]] = 1;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
    double cc = 0.0;
    for (int v = 0; v < n; ++v) {
      long long reach = 0, dsum = 0;
      for (int u = 0; u < n; ++u)
        if (u != v && dist[v][u] < kInf) {
          ++reach;
          dsum += dist[v][u];
        }
      if (reach > 0 && n > 1) {
        const double r = static_cast<double>(reach);
        cc += (r / static_cast<double>(dsum)) * (r / (n - 1.0));
      }
    }
    EXPECT_NEAR(got.cc, cc / n, 1e-9);

    double log_sum = 0.0;  // every node is edge-incident by construction
    for (int v = 0; v < n; ++v) {
      int d = 0;
      for (int u = 0; u < n; ++u) d += adj[v][u] ? 1 : 0;
      log_sum += std::log(d / 0.5);
    }
    EXPECT_NEAR(got.ple, 1.0 + n / log_sum, 1e-9);
  }
}

SnapshotStats stats_with_md(double md) {
  SnapshotStats s;
  s.md = md;
  return s;
}

TEST(MedianAbsErrorTest, IdenticalListsGiveZeros) {
  const std::vector<SnapshotStats> xs = {stats_with_md(1.0), stats_with_md(2.5)};
  const SnapshotStats mae = median_abs_error(xs, xs);
  EXPECT_EQ(mae.cc, 0.0);
  EXPECT_EQ(mae.md, 0.0);
  EXPECT_EQ(mae.nc, 0.0);
  EXPECT_EQ(mae.ple, 0.0);
  EXPECT_EQ(mae.wc, 0.0);
}

TEST(MedianAbsErrorTest, OddLengthTakesTheMiddleDifference) {
  const std::vector<SnapshotStats> real = {stats_with_md(1), stats_with_md(2),
                                           stats_with_md(3)};
  const std::vector<SnapshotStats> synth = {stats_with_md(2), stats_with_md(2),
                                            stats_with_md(5)};
  EXPECT_DOUBLE_EQ(median_abs_error(real, synth).md, 1.0);  // |diffs| = 1,0,2
}

TEST(MedianAbsErrorTest, SingleSnapshotIsTheDirectDifference) {
  EXPECT_DOUBLE_EQ(
      median_abs_error({stats_with_md(4.0)}, {stats_with_md(1.5)}).md, 2.5);
}

TEST(MedianAbsErrorTest, EvenLengthAveragesTheMiddleTwo) {
  const std::vector<SnapshotStats> real = {stats_with_md(0), stats_with_md(0)};
  const std::vector<SnapshotStats> synth = {stats_with_md(1), stats_with_md(3)};
  EXPECT_DOUBLE_EQ(median_abs_error(real, synth).md, 2.0);
}

TEST(MedianAbsErrorTest, SharedPermutationLeavesResultUnchanged) {
  Rng rng(31);
  std::vector<SnapshotStats> real(8), synth(8);
  for (int k = 0; k < 8; ++k) {
    real[k] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(),
               rng.uniform()};
    synth[k] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(),
                rng.uniform()};
  }
  const SnapshotStats base = median_abs_error(real, synth);

  const std::vector<int> perm = {3, 1, 4, 0, 7, 5, 2, 6};
  std::vector<SnapshotStats> real_p, synth_p;
  for (int k : perm) {
    real_p.push_back(real[k]);
    synth_p.push_back(synth[k]);
  }
  const SnapshotStats shuffled = median_abs_error(real_p, synth_p);
  EXPECT_DOUBLE_EQ(base.cc, shuffled.cc);
  EXPECT_DOUBLE_EQ(base.md, shuffled.md);
  EXPECT_DOUBLE_EQ(base.nc, shuffled.nc);
  EXPECT_DOUBLE_EQ(base.ple, shuffled.ple);
  EXPECT_DOUBLE_EQ(base.wc, shuffled.wc);
}

TEST(MedianAbsErrorTest, RejectsMismatchedOrEmptyLists) {
  const std::vector<SnapshotStats> one = {stats_with_md(1.0)};
  EXPECT_THROW(median_abs_error(one, {}), std::invalid_argument);
  EXPECT_THROW(median_abs_error({}, {}), std::invalid_argument);
}

TEST(HistogramTest, CategoricalCountsByValue) {
  std::vector<Interaction> events;
  for (double v : {0.0, 0.0, 1.0, 0.0})
    events.push_back({0, 1, 0.0, {v}});
  const EventStream s = stream_of(std::move(events), 2, "cat:2");
  const Histogram h = feature_histogram(s, 0, uniform_edges(0.0, 2.0, 2));
  ASSERT_EQ(h.counts.rows(), 2);
  EXPECT_EQ(h.counts(0, 0), 3.0);
  EXPECT_EQ(h.counts(1, 0), 1.0);
  EXPECT_FALSE(h.is_2d());
  EXPECT_EQ(h.total(), 4.0);
}

TEST(HistogramTest, LastBinIsClosed) {
  const EventStream s =
      stream_of({{0, 1, 0.0, {0.0}}, {0, 1, 1.0, {1.0}}}, 2, "num");
  const Histogram h = feature_histogram(s, 0, uniform_edges(0.0, 1.0, 2));
  EXPECT_EQ(h.counts(0, 0), 1.0);
  EXPECT_EQ(h.counts(1, 0), 1.0);
}

TEST(HistogramTest, OutOfRangeValuesClampIntoEndBins) {
  const EventStream s =
      stream_of({{0, 1, 0.0, {-5.0}}, {0, 1, 1.0, {7.0}}}, 2, "num");
  const Histogram h = feature_histogram(s, 0, uniform_edges(0.0, 1.0, 2));
  EXPECT_EQ(h.counts(0, 0), 1.0);
  EXPECT_EQ(h.counts(1, 0), 1.0);
}

TEST(HistogramTest, PairMarginalsEqualTheSingleFeatureHistograms) {
  const EventStream s = random_stream(300, 12, 99);
  const std::vector<double> xe = uniform_edges(0.0, 3.0, 3);
  const std::vector<double> ye = uniform_edges(-3.0, 3.0, 4);
  const Histogram joint = pair_histogram(s, 0, 1, xe, ye);
  const Histogram hx = feature_histogram(s, 0, xe);
  const Histogram hy = feature_histogram(s, 1, ye);
  ASSERT_TRUE(joint.is_2d());
  for (Eigen::Index i = 0; i < joint.counts.rows(); ++i)
    EXPECT_EQ(joint.counts.row(i).sum(), hx.counts(i, 0));
  for (Eigen::Index j = 0; j < joint.counts.cols(); ++j)
    EXPECT_EQ(joint.counts.col(j).sum(), hy.counts(j, 0));
}

TEST(HistogramTest, PmfRejectsZeroTotalAndNormalizesOtherwise) {
  Histogram zero;
  zero.x_edges = uniform_edges(0.0, 1.0, 2);
  zero.counts = Eigen::MatrixXd::Zero(2, 1);
  EXPECT_THROW(zero.pmf(), std::domain_error);

  zero.counts << 3.0, 1.0;
  const Eigen::MatrixXd pmf = zero.pmf();
  EXPECT_DOUBLE_EQ(pmf(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(pmf(1, 0), 0.25);
}

TEST(HistogramTest, UniformEdgesWidenDegenerateRanges) {
  const std::vector<double> edges = uniform_edges(2.0, 2.0, 4);
  ASSERT_EQ(edges.size(), 5u);
  EXPECT_DOUBLE_EQ(edges.front(), 1.5);
  EXPECT_DOUBLE_EQ(edges.back(), 2.5);
  EXPECT_THROW(uniform_edges(0.0, 1.0, 0), std::invalid_argument);
}

Histogram hist_1d(const std::vector<double>& counts) {
  Histogram h;
  h.x_edges = uniform_edges(0.0, 1.0, static_cast<int>(counts.size()));
  h.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(counts.size()), 1);
  for (std::size_t i = 0; i < counts.size(); ++i)
    h.counts(static_cast<Eigen::Index>(i), 0) = counts[i];
  return h;
}

TEST(JsDistanceTest, IdenticalHistogramsGiveZero) {
  const Histogram p = hist_1d({3, 1, 4, 1});
  EXPECT_DOUBLE_EQ(js_distance(p, p), 0.0);
}

TEST(JsDistanceTest, DisjointSupportsGiveOne) {
  EXPECT_NEAR(js_distance(hist_1d({1, 0}), hist_1d({0, 1})), 1.0, 1e-9);
}

TEST(JsDistanceTest, PointMassVersusFairCoin) {
  // JSD([1,0], [1/2,1/2]) = 1.5 - 0.75·log2(3) = 0.311278...
  const double expected = std::sqrt(1.5 - 0.75 * std::log2(3.0));
  EXPECT_NEAR(js_distance(hist_1d({1, 0}), hist_1d({0.5, 0.5})), expected,
              1e-12);
  EXPECT_NEAR(expected, 0.5579, 1e-4);
}

TEST(JsDistanceTest, SymmetricExactlyAndBounded) {
  Rng rng(5);
  for (int it = 0; it < 20; ++it) {
    std::vector<double> a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = static_cast<double>(rng.uniform_below(10));
      b[i] = static_cast<double>(rng.uniform_below(10));
    }
    a[0] += 1.0;  // keep totals positive
    b[0] += 1.0;
    const double pq = js_distance(hist_1d(a), hist_1d(b));
    const double qp = js_distance(hist_1d(b), hist_1d(a));
    EXPECT_EQ(pq, qp);
    EXPECT_GE(pq, 0.0);
    EXPECT_LE(pq, 1.0);
  }
}

TEST(JsDistanceTest, RejectsBinningMismatch) {
  const Histogram p = hist_1d({1, 2});
  Histogram q = hist_1d({1, 2});
  q.x_edges[1] += 0.01;
  EXPECT_THROW(js_distance(p, q), std::invalid_argument);
  EXPECT_THROW(js_distance(hist_1d({1, 2}), hist_1d({1, 2, 3})),
               std::invalid_argument);
}

TEST(EdgeOverlapTest, SelfOverlapIsOne) {
  const EventStream s = random_stream(40, 6, 11);
  EXPECT_DOUBLE_EQ(edge_overlap(s, s), 1.0);
}

TEST(EdgeOverlapTest, DisjointTriplesGiveZero) {
  const EventStream a = stream_of({{0, 1, 0.0, {}}, {1, 2, 1.0, {}}}, 3);
  const EventStream b = stream_of({{0, 1, 0.5, {}}, {2, 1, 1.0, {}}}, 3);
  EXPECT_DOUBLE_EQ(edge_overlap(a, b), 0.0);
}

TEST(EdgeOverlapTest, CountsExactTripleMatchesOnly) {
  const EventStream source = stream_of(
      {{0, 1, 0.0, {}}, {1, 2, 1.0, {}}, {2, 3, 2.0, {}}, {3, 4, 3.0, {}}}, 5);
  const EventStream synth = stream_of(
      {{1, 2, 1.0, {}}, {2, 3, 2.0, {}}, {4, 0, 9.0, {}}}, 5);
  EXPECT_DOUBLE_EQ(edge_overlap(source, synth), 0.5);  // 2 of 4 triples
}

TEST(EdgeOverlapTest, RejectsEmptySource) {
  const EventStream empty = stream_of({}, 2);
  const EventStream s = stream_of({{0, 1, 0.0, {}}}, 2);
  EXPECT_THROW(edge_overlap(empty, s), std::invalid_argument);
  EXPECT_DOUBLE_EQ(edge_overlap(s, empty), 0.0);
}

// Rank of i under (score desc, index asc) by direct pairwise counting.
double ap_oracle(const std::vector<int>& labels,
                 const std::vector<double>& scores) {
  double sum = 0.0;
  long long positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    ++positives;
    long long rank = 0, hits = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const bool ahead =
          scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
      if (ahead) {
        ++rank;
        if (labels[j] == 1) ++hits;
      }
    }
    sum += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return sum / static_cast<double>(positives);
}

double auroc_oracle(const std::vector<int>& labels,
                    const std::vector<double>& scores) {
  double wins = 0.0;
  long long p = 0, n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1)
      ++p;
    else
      ++n;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(p) * static_cast<double>(n));
}

TEST(AveragePrecisionTest, PerfectRankingIsOne) {
  EXPECT_DOUBLE_EQ(average_precision({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1}), 1.0);
}

TEST(AveragePrecisionTest, AlternatingExample) {
  EXPECT_NEAR(average_precision({1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.6}),
              (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
}

TEST(AveragePrecisionTest, SolePositiveRankedSecond) {
  EXPECT_DOUBLE_EQ(average_precision({0, 1}, {0.9, 0.1}), 0.5);
}

TEST(AveragePrecisionTest, TiesResolveByOriginalIndex) {
  EXPECT_DOUBLE_EQ(average_precision({0, 1}, {0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(average_precision({1, 0}, {0.5, 0.5}), 1.0);
}

TEST(AveragePrecisionTest, MatchesPairwiseOracleOnRandomVectors) {
  Rng rng(777);
  for (int it = 0; it < 200; ++it) {
    const int n = 1 + static_cast<int>(rng.uniform_below(20));
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.uniform_below(2));
      scores[i] = 0.25 * static_cast<double>(rng.uniform_below(5));  // ties
    }
    labels[static_cast<std::size_t>(rng.uniform_below(n))] = 1;
    EXPECT_NEAR(average_precision(labels, scores), ap_oracle(labels, scores),
                1e-12);
  }
}

TEST(AveragePrecisionTest, RejectsDegenerateInput) {
  EXPECT_THROW(average_precision({0, 0}, {0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(average_precision({1}, {0.1, 0.2}), std::invalid_argument);
}

TEST(AurocTest, PerfectSeparationIsOne) {
  EXPECT_DOUBLE_EQ(auroc({1, 1, 0}, {0.9, 0.8, 0.1}), 1.0);
}

TEST(AurocTest, AlternatingExampleIsThreeQuarters) {
  EXPECT_DOUBLE_EQ(auroc({1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.6}), 0.75);
}

TEST(AurocTest, AllTiedScoresGiveOneHalf) {
  EXPECT_DOUBLE_EQ(auroc({1, 0, 1, 0}, {0.4, 0.4, 0.4, 0.4}), 0.5);
}

TEST(AurocTest, MatchesPairEnumerationOracleOnRandomVectors) {
  Rng rng(888);
  for (int it = 0; it < 200; ++it) {
    const int n = 2 + static_cast<int>(rng.uniform_below(19));
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.uniform_below(2));
      scores[i] = 0.25 * static_cast<double>(rng.uniform_below(5));
    }
    labels[0] = 1;  // force both classes
    labels[1] = 0;
    EXPECT_NEAR(auroc(labels, scores), auroc_oracle(labels, scores), 1e-12);
  }
}

TEST(AurocTest, RejectsSingleClassInput) {
  EXPECT_THROW(auroc({1, 1}, {0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(auroc({0, 0}, {0.1, 0.2}), std::invalid_argument);
}

TEST(NegativeSamplingTest, InductiveKeepsOnlySourcesWithUnseenDestinations) {
  // Destinations in training: {1, 2}.  Source 0 saw both, source 1 saw 2.
  const EventStream train =
      stream_of({{0, 1, 0.0, {}}, {0, 2, 1.0, {}}, {1, 2, 2.0, {}}}, 6);
  const EventStream test =
      stream_of({{0, 2, 3.0, {}}, {3, 1, 4.0, {}}, {1, 1, 5.0, {}}}, 6);
  Rng rng(1);
  const LabeledQueries lq = inductive_negative_sampling(train, test, rng);

  // (0,2): no unseen destination left -> skipped.  (3,1): negative forced
  // to 2.  (1,1): only other destination 2 was seen -> skipped.
  EXPECT_EQ(lq.skipped, 2);
  ASSERT_EQ(lq.queries.size(), 2u);
  EXPECT_EQ(lq.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(lq.queries[0].src, 3);
  EXPECT_EQ(lq.queries[0].dst, 1);
  EXPECT_DOUBLE_EQ(lq.queries[0].t, 4.0);
  EXPECT_EQ(lq.queries[1].src, 3);
  EXPECT_EQ(lq.queries[1].dst, 2);
  EXPECT_DOUBLE_EQ(lq.queries[1].t, 4.0);
  EXPECT_EQ(lq.event_index, (std::vector<std::size_t>{1, 1}));
}

TEST(NegativeSamplingTest, ContractsHoldOnRandomStreams) {
  const EventStream train = random_stream(200, 15, 21, "");
  const EventStream test = random_stream(60, 15, 22, "");

  Rng rng_a(9), rng_b(9);
  const LabeledQueries a = inductive_negative_sampling(train, test, rng_a);
  const LabeledQueries b = inductive_negative_sampling(train, test, rng_b);

  // Fixed seed, identical sample.
  ASSERT_EQ(a.queries.size(), b.queries.size());
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    EXPECT_EQ(a.queries[i].src, b.queries[i].src);
    EXPECT_EQ(a.queries[i].dst, b.queries[i].dst);
  }

  EXPECT_LE(a.queries.size(), 2 * test.size());
  EXPECT_EQ(a.queries.size() % 2, 0u);
  EXPECT_EQ(a.queries.size() / 2 + static_cast<std::size_t>(a.skipped),
            test.size());

  std::set<std::pair<int, int>> train_pairs;
  std::set<int> train_dsts;
  for (const Interaction& ev : train.interactions()) {
    train_pairs.insert({ev.src, ev.dst});
    train_dsts.insert(ev.dst);
  }
  for (std::size_t i = 0; i < a.queries.size(); i += 2) {
    EXPECT_EQ(a.labels[i], 1);
    EXPECT_EQ(a.labels[i + 1], 0);
    const Interaction& ev = test.interactions()[a.event_index[i]];
    EXPECT_EQ(a.queries[i].src, ev.src);
    EXPECT_EQ(a.queries[i].dst, ev.dst);
    const LinkQuery& neg = a.queries[i + 1];
    EXPECT_EQ(neg.src, ev.src);
    EXPECT_NE(neg.dst, ev.dst);
    EXPECT_TRUE(train_dsts.count(neg.dst));
    EXPECT_FALSE(train_pairs.count({neg.src, neg.dst}));
    EXPECT_DOUBLE_EQ(neg.t, ev.t);
  }
}

TEST(NegativeSamplingTest, StandardProtocolAllowsSeenPairs) {
  const EventStream train = stream_of({{0, 1, 0.0, {}}, {0, 2, 1.0, {}}}, 4);
  const EventStream test = stream_of({{0, 1, 2.0, {}}}, 4);

  Rng rng(3);
  const LabeledQueries inductive =
      inductive_negative_sampling(train, test, rng);
  EXPECT_EQ(inductive.skipped, 1);
  EXPECT_TRUE(inductive.queries.empty());

  Rng rng2(3);
  const LabeledQueries standard = standard_negative_sampling(train, test, rng2);
  EXPECT_EQ(standard.skipped, 0);
  ASSERT_EQ(standard.queries.size(), 2u);
  EXPECT_EQ(standard.queries[1].dst, 2);  // seen pair (0,2) is allowed
}

TEST(NegativeSamplingTest, RejectsUniverseMismatchAndEmptyStreams) {
  const EventStream a = stream_of({{0, 1, 0.0, {}}}, 2);
  const EventStream b = stream_of({{0, 1, 0.0, {}}}, 3);
  Rng rng(0);
  EXPECT_THROW(inductive_negative_sampling(a, b, rng), std::invalid_argument);
  const EventStream empty = stream_of({}, 2);
  EXPECT_THROW(inductive_negative_sampling(a, empty, rng),
               std::invalid_argument);
  EXPECT_THROW(standard_negative_sampling(empty, a, rng),
               std::invalid_argument);
}

EventStream shifted(const EventStream& s, double offset) {
  std::vector<Interaction> events = s.interactions();
  for (Interaction& ev : events) ev.t += offset;
  return EventStream(s.schema(), s.num_nodes(), s.origin_time() + offset,
                     std::move(events));
}

TEST(LinkPredictionTest, DeterministicBoundedAndChunkInvariant) {
  ModelConfig cfg;
  cfg.d_mem = 6;
  cfg.d_emb = 6;
  cfg.d_time = 4;
  cfg.k_nbr = 4;
  cfg.attn_heads = 2;
  cfg.d_hidden = 5;
  cfg.d_seq_hidden = 7;
  cfg.d_seq_in = 3;
  cfg.gmm_components = 2;
  Rng init = Rng::stream(3, "init");
  const Model model(FeatureSchema::parse(""), cfg, init);

  const EventStream train = random_stream(80, 10, 51, "");
  const double train_end = train.interactions().back().t;
  const EventStream test = shifted(random_stream(30, 10, 52, ""), train_end);

  NodeStates states(10, cfg.d_mem, 0.0);
  update_memory(model, states, std::span(train.interactions()));

  const LinkPredictionResult a =
      link_prediction(model, states, train, test, 5, 16);
  const LinkPredictionResult b =
      link_prediction(model, states, train, test, 5, 16);
  EXPECT_EQ(a.ap, b.ap);
  EXPECT_EQ(a.auroc, b.auroc);
  EXPECT_EQ(a.num_queries, b.num_queries);

  EXPECT_GE(a.ap, 0.0);
  EXPECT_LE(a.ap, 1.0);
  EXPECT_GE(a.auroc, 0.0);
  EXPECT_LE(a.auroc, 1.0);
  EXPECT_EQ(a.num_queries % 2, 0u);
  EXPECT_EQ(a.num_queries / 2 + static_cast<std::size_t>(a.skipped),
            test.size());

  // The negative sample is drawn once up front, so it cannot depend on the
  // fold chunking; scores do (states evolve), but the query set does not.
  const LinkPredictionResult c =
      link_prediction(model, states, train, test, 5, 7);
  EXPECT_EQ(c.num_queries, a.num_queries);
  EXPECT_EQ(c.skipped, a.skipped);

  EXPECT_THROW(link_prediction(model, states, train, test, 5, 0),
               std::invalid_argument);
}

TEST(EvaluateFidelityTest, StreamAgainstItselfIsPerfect) {
  const EventStream s = random_stream(400, 20, 77);
  const FidelityReport rep = evaluate_fidelity(s, s, 5, 10, 5);

  EXPECT_EQ(rep.mae.cc, 0.0);
  EXPECT_EQ(rep.mae.md, 0.0);
  EXPECT_EQ(rep.mae.nc, 0.0);
  EXPECT_EQ(rep.mae.ple, 0.0);
  EXPECT_EQ(rep.mae.wc, 0.0);
  EXPECT_GT(rep.real_mean_md, 0.0);
  EXPECT_DOUBLE_EQ(rep.overlap, 1.0);
  ASSERT_EQ(rep.js_single.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.js_single[0], 0.0);
  EXPECT_DOUBLE_EQ(rep.js_single[1], 0.0);
  ASSERT_EQ(rep.js_pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.js_pairs[0], 0.0);
  EXPECT_EQ(rep.pair_index, (std::vector<std::pair<int, int>>{{0, 1}}));
  ASSERT_EQ(rep.real_stats.size(), 5u);
  ASSERT_EQ(rep.real_hist.size(), 2u);
  ASSERT_EQ(rep.synth_hist.size(), 2u);
}

TEST(EvaluateFidelityTest, IndependentStreamsStayInBounds) {
  const EventStream real = random_stream(300, 18, 101);
  const EventStream synth = random_stream(250, 18, 202);
  const FidelityReport rep = evaluate_fidelity(real, synth, 4, 8, 4);

  for (double v : rep.js_single) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (double v : rep.js_pairs) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_GE(rep.overlap, 0.0);
  EXPECT_LE(rep.overlap, 1.0);
  EXPECT_GE(rep.mae.md, 0.0);
  EXPECT_EQ(rep.real_stats.size(), 4u);
  EXPECT_EQ(rep.synth_stats.size(), 4u);
  EXPECT_GE(rep.js_single_std, 0.0);
}

TEST(EvaluateFidelityTest, RejectsSchemaMismatchAndEmptyStreams) {
  const EventStream a = random_stream(10, 4, 1, "num");
  const EventStream b = random_stream(10, 4, 2, "cat:2");
  EXPECT_THROW(evaluate_fidelity(a, b), std::invalid_argument);
  const EventStream empty = stream_of({}, 4, "num");
  EXPECT_THROW(evaluate_fidelity(a, empty), std::invalid_argument);
}

}  // namespace
}  // namespace dggen
