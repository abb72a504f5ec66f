// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace dggen::ad {

using Mat = Eigen::MatrixXd;

// Handle into a Tape.  Cheap to copy; valid only for the tape it came from.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode automatic differentiation over matrix-valued expressions.
//
// Values are computed eagerly as ops are recorded; backward() replays the
// recording in reverse, accumulating gradients into every node that
// (transitively) depends on a gradient-carrying leaf.  Matrices are treated
// column-wise as batches: a [d x B] node holds B column vectors.
//
// A tape constructed with grad_enabled = false records no backward closures
// and propagates no gradient requirements; forward math is unchanged.  This
// keeps inference and training on a single code path.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Leaves.  requires_grad marks trainable parameters.
  Var leaf(Mat value, bool requires_grad);
  Var constant(Mat value) { return leaf(std::move(value), false); }

  const Mat& val(Var v) const { return nodes_[v.idx].value; }
  // Gradient accumulated by backward(); zeros if the node was off-path.
  Mat grad_of(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and runs the reverse sweep.  loss must be 1x1.
  void backward(Var loss);

  // ---- elementwise and linear ops ----
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);  // elementwise product
  Var cdiv(Var a, Var b);  // elementwise quotient
  Var add_col(Var x, Var col);     // x [r x c] + col [r x 1] broadcast over columns
  Var sub_rowvec(Var x, Var row);  // x [r x c] - row [1 x c] broadcast over rows
  Var relu(Var x);
  Var softplus(Var x);  // numerically stable log(1 + e^x)
  Var sigmoid(Var x);
  Var tanh_(Var x);
  Var cos_(Var x);
  Var exp_(Var x);
  Var log_(Var x);
  Var neg(Var x);
  Var scale(Var x, double s);
  Var add_scalar(Var x, double s);

  // ---- structural ops ----
  Var vcat(const std::vector<Var>& parts);
  Var hcat(const std::vector<Var>& parts);
  Var slice_rows(Var x, int begin, int count);
  Var transpose(Var x);
  // out.col(k) = x.col(idx[k]); backward scatter-adds into duplicated columns.
  Var gather_cols(Var x, std::vector<int> idx);
  // out(0, j) = x(rows[j], j); the categorical pick of one row per column.
  Var pick_per_col(Var x, std::vector<int> rows);

  // ---- reductions and normalizers ----
  Var sum_all(Var x);            // [1 x 1]
  Var colwise_logsumexp(Var x);  // [1 x c], max-shifted for stability
  Var softmax_cols(Var x);       // softmax over each column

  // ---- fused ops ----
  // Per-column attention over fixed-size neighbor slots.  q is [d x C],
  // k is [d x C*slots]; out(j, c) = q(:,c) . k(:, c*slots + j).
  Var attn_scores(Var q, Var k, int slots);
  // v is [d x C*slots], a is [slots x C]; out.col(c) = V_c * a.col(c)
  // where V_c = v.middleCols(c*slots, slots).
  Var attn_mix(Var v, Var a, int slots);
  // All-pairs bilinear ReLU score: a [h x B], d [h x C], w [1 x h];
  // out(c, b) = w . relu(a.col(b) + d.col(c)).
  Var pairwise_relu_dot(Var a, Var d, Var w);

 private:
  struct Node {
    Mat value;
    Mat grad;  // empty until touched by backward
    bool requires_grad = false;
    std::function<void(Tape&)> back;  // unset for leaves and no-grad nodes
  };

  // Registers a computed node; wires the closure only when gradients can
  // actually flow (tape enabled and some parent requires them).
  Var emit(Mat value, std::initializer_list<Var> parents,
           std::function<void(Tape&)> back);
  bool any_requires(std::initializer_list<Var> parents) const;
  Mat& grad_ref(int idx);  // lazily sized to the node's value shape

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

}  // namespace dggen::ad
