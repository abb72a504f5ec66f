// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/nn.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace dggen {
namespace {

using ad::Mat;

TEST(ParamStore, NamedRegistrationAndLookup) {
  ParamStore p;
  const int a = p.add("w", Mat::Ones(2, 3));
  const int b = p.add("b", Mat::Zero(2, 1));
  EXPECT_EQ(a, 0);
  EXPECT_EQ(b, 1);
  EXPECT_EQ(p.count(), 2);
  EXPECT_EQ(p.find("w"), 0);
  EXPECT_EQ(p.find("missing"), -1);
  EXPECT_THROW(p.add("w", Mat::Zero(1, 1)), std::logic_error);
  p.value("b").setConstant(5.0);
  EXPECT_DOUBLE_EQ(p.value(1)(0, 0), 5.0);
}

TEST(Adam, SingleStepMatchesHandComputation) {
  // One Adam step from zero moments: update = lr * g / (|g| + eps)
  // after bias correction, i.e. lr * sign-ish step, independent of |g|.
  ParamStore p;
  p.add("w", Mat::Zero(1, 1));
  Adam opt(0.01);
  const Mat g = Mat::Constant(1, 1, 3.0);
  opt.step(p, {g});
  // m_hat = g, v_hat = g^2, update = lr * g / (sqrt(g^2) + eps) ~ lr.
  EXPECT_NEAR(p.value(0)(0, 0), -0.01, 1e-8);
  EXPECT_EQ(opt.steps_taken(), 1);
}

TEST(Adam, DescendsAQuadratic) {
  // Minimize f(w) = 0.5 * ||w - target||^2 with exact gradients.
  ParamStore p;
  p.add("w", Mat::Zero(3, 1));
  const Mat target = (Mat(3, 1) << 1.0, -2.0, 0.5).finished();
  Adam opt(0.05);
  for (int step = 0; step < 2000; ++step) opt.step(p, {p.value(0) - target});
  EXPECT_LT((p.value(0) - target).norm(), 1e-3);
}

TEST(GlorotUniform, BoundsAndDeterminism) {
  Rng a = Rng::stream(3, "init");
  Rng b = Rng::stream(3, "init");
  const Mat m1 = glorot_uniform(a, 20, 30);
  const Mat m2 = glorot_uniform(b, 20, 30);
  EXPECT_TRUE(m1 == m2);
  const double bound = std::sqrt(6.0 / 50.0);
  EXPECT_LE(m1.maxCoeff(), bound);
  EXPECT_GE(m1.minCoeff(), -bound);
  // Not degenerate.
  EXPECT_GT(m1.cwiseAbs().maxCoeff(), bound * 0.5);
}

TEST(GruCell, FixedPointAndGatingBehavior) {
  // With all weights zero: r = z = sigmoid(0) = 0.5, n = tanh(0) = 0,
  // h' = 0.5 * h.
  ParamStore params;
  Rng init(0);
  const auto idx = register_gru(params, "g", 2, 3, init);
  for (int i = 0; i < params.count(); ++i) params.value(i).setZero();

  ad::Tape t;
  const auto leaves = params.make_leaves(t);
  const GruRefs refs = gru_refs(leaves, idx);
  const Mat h0 = (Mat(3, 2) << 1, 2, 3, 4, 5, 6).finished();
  const ad::Var h1 = gru_cell(t, refs, t.constant(Mat::Zero(2, 2)), t.constant(h0));
  EXPECT_TRUE(t.val(h1).isApprox(0.5 * h0, 1e-12));
}

}  // namespace
}  // namespace dggen
