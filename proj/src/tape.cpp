// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dggen::ad {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double softplus_scalar(double x) {
  // Large |x| branches avoid overflow in exp and keep full precision.
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

}  // namespace

Var Tape::leaf(Mat value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_ && requires_grad;
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

bool Tape::any_requires(std::initializer_list<Var> parents) const {
  for (Var p : parents)
    if (nodes_[p.idx].requires_grad) return true;
  return false;
}

Var Tape::emit(Mat value, std::initializer_list<Var> parents,
               std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_ && any_requires(parents);
  if (n.requires_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

Mat& Tape::grad_ref(int idx) {
  Node& n = nodes_[idx];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Mat Tape::grad_of(Var v) const {
  const Node& n = nodes_[v.idx];
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (!grad_enabled_) throw std::logic_error("backward on a no-grad tape");
  check(val(loss).rows() == 1 && val(loss).cols() == 1, "backward: loss must be 1x1");
  if (!nodes_[loss.idx].requires_grad)
    throw std::logic_error("backward: loss does not depend on any parameter");
  grad_ref(loss.idx) = Mat::Ones(1, 1);
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.back || n.grad.size() == 0) continue;  // leaf or off-path
    n.back(*this);
  }
}

// Accumulation guard shared by every backward closure.
#define DGGEN_ADD_GRAD(t, idx, expr)                          \
  do {                                                        \
    if ((t).nodes_[idx].requires_grad) (t).grad_ref(idx) += (expr); \
  } while (0)

Var Tape::matmul(Var a, Var b) {
  check(val(a).cols() == val(b).rows(), "matmul: inner dimensions differ");
  return emit(val(a) * val(b), {a, b}, [ia = a.idx, ib = b.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    DGGEN_ADD_GRAD(t, ia, g * t.nodes_[ib].value.transpose());
    DGGEN_ADD_GRAD(t, ib, t.nodes_[ia].value.transpose() * g);
  });
}

Var Tape::add(Var a, Var b) {
  check(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
        "add: shape mismatch");
  return emit(val(a) + val(b), {a, b}, [ia = a.idx, ib = b.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    DGGEN_ADD_GRAD(t, ia, g);
    DGGEN_ADD_GRAD(t, ib, g);
  });
}

Var Tape::sub(Var a, Var b) {
  check(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
        "sub: shape mismatch");
  return emit(val(a) - val(b), {a, b}, [ia = a.idx, ib = b.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    DGGEN_ADD_GRAD(t, ia, g);
    DGGEN_ADD_GRAD(t, ib, -g);
  });
}

Var Tape::cmul(Var a, Var b) {
  check(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
        "cmul: shape mismatch");
  return emit(val(a).cwiseProduct(val(b)), {a, b},
              [ia = a.idx, ib = b.idx, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                DGGEN_ADD_GRAD(t, ia, g.cwiseProduct(t.nodes_[ib].value));
                DGGEN_ADD_GRAD(t, ib, g.cwiseProduct(t.nodes_[ia].value));
              });
}

Var Tape::cdiv(Var a, Var b) {
  check(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
        "cdiv: shape mismatch");
  return emit(val(a).cwiseQuotient(val(b)), {a, b},
              [ia = a.idx, ib = b.idx, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                const Mat& bv = t.nodes_[ib].value;
                DGGEN_ADD_GRAD(t, ia, g.cwiseQuotient(bv));
                DGGEN_ADD_GRAD(
                    t, ib,
                    -g.cwiseProduct(t.nodes_[io].value).cwiseQuotient(bv));
              });
}

Var Tape::add_col(Var x, Var col) {
  check(val(col).cols() == 1 && val(col).rows() == val(x).rows(),
        "add_col: col must be [rows x 1]");
  Mat out = val(x);
  out.colwise() += val(col).col(0);
  return emit(std::move(out), {x, col},
              [ix = x.idx, ic = col.idx, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                DGGEN_ADD_GRAD(t, ix, g);
                DGGEN_ADD_GRAD(t, ic, g.rowwise().sum());
              });
}

Var Tape::sub_rowvec(Var x, Var row) {
  check(val(row).rows() == 1 && val(row).cols() == val(x).cols(),
        "sub_rowvec: row must be [1 x cols]");
  Mat out = val(x);
  out.rowwise() -= val(row).row(0);
  return emit(std::move(out), {x, row},
              [ix = x.idx, ir = row.idx, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                DGGEN_ADD_GRAD(t, ix, g);
                DGGEN_ADD_GRAD(t, ir, -g.colwise().sum());
              });
}

Var Tape::relu(Var x) {
  return emit(val(x).cwiseMax(0.0), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    // Subgradient 0 at the kink.
    const Mat mask = (t.nodes_[ix].value.array() > 0.0).cast<double>();
    DGGEN_ADD_GRAD(t, ix, g.cwiseProduct(mask));
  });
}

Var Tape::softplus(Var x) {
  Mat out = val(x).unaryExpr([](double v) { return softplus_scalar(v); });
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    const Mat d = t.nodes_[ix].value.unaryExpr(
        [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    DGGEN_ADD_GRAD(t, ix, g.cwiseProduct(d));
  });
}

Var Tape::sigmoid(Var x) {
  Mat out = val(x).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    const Mat& y = t.nodes_[io].value;
    DGGEN_ADD_GRAD(t, ix, g.cwiseProduct(y.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y)));
  });
}

Var Tape::tanh_(Var x) {
  Mat out = val(x).array().tanh().matrix();
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    const Mat& y = t.nodes_[io].value;
    DGGEN_ADD_GRAD(t, ix, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var Tape::cos_(Var x) {
  Mat out = val(x).array().cos().matrix();
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    DGGEN_ADD_GRAD(t, ix, g.cwiseProduct((-t.nodes_[ix].value.array().sin()).matrix()));
  });
}

Var Tape::exp_(Var x) {
  Mat out = val(x).array().exp().matrix();
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    DGGEN_ADD_GRAD(t, ix, g.cwiseProduct(t.nodes_[io].value));
  });
}

Var Tape::log_(Var x) {
  Mat out = val(x).array().log().matrix();
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    DGGEN_ADD_GRAD(t, ix, g.cwiseQuotient(t.nodes_[ix].value));
  });
}

Var Tape::neg(Var x) {
  return emit(-val(x), {x}, [ix = x.idx, io = size()](Tape& t) {
    DGGEN_ADD_GRAD(t, ix, -t.nodes_[io].grad);
  });
}

Var Tape::scale(Var x, double s) {
  return emit(val(x) * s, {x}, [ix = x.idx, io = size(), s](Tape& t) {
    DGGEN_ADD_GRAD(t, ix, t.nodes_[io].grad * s);
  });
}

Var Tape::add_scalar(Var x, double s) {
  return emit((val(x).array() + s).matrix(), {x}, [ix = x.idx, io = size()](Tape& t) {
    DGGEN_ADD_GRAD(t, ix, t.nodes_[io].grad);
  });
}

Var Tape::vcat(const std::vector<Var>& parts) {
  check(!parts.empty(), "vcat: no parts");
  const auto cols = val(parts[0]).cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    check(val(p).cols() == cols, "vcat: column mismatch");
    rows += val(p).rows();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleRows(at, val(p).rows()) = val(p);
    at += val(p).rows();
  }
  std::vector<int> idx;
  bool needs = false;
  for (Var p : parts) {
    idx.push_back(p.idx);
    needs = needs || nodes_[p.idx].requires_grad;
  }
  Node n;
  n.value = std::move(out);
  n.requires_grad = grad_enabled_ && needs;
  if (n.requires_grad) {
    n.back = [idx = std::move(idx), io = size()](Tape& t) {
      const Mat& g = t.nodes_[io].grad;
      Eigen::Index at2 = 0;
      for (int p : idx) {
        const auto r = t.nodes_[p].value.rows();
        DGGEN_ADD_GRAD(t, p, g.middleRows(at2, r));
        at2 += r;
      }
    };
  }
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

Var Tape::hcat(const std::vector<Var>& parts) {
  check(!parts.empty(), "hcat: no parts");
  const auto rows = val(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    check(val(p).rows() == rows, "hcat: row mismatch");
    cols += val(p).cols();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, val(p).cols()) = val(p);
    at += val(p).cols();
  }
  std::vector<int> idx;
  bool needs = false;
  for (Var p : parts) {
    idx.push_back(p.idx);
    needs = needs || nodes_[p.idx].requires_grad;
  }
  Node n;
  n.value = std::move(out);
  n.requires_grad = grad_enabled_ && needs;
  if (n.requires_grad) {
    n.back = [idx = std::move(idx), io = size()](Tape& t) {
      const Mat& g = t.nodes_[io].grad;
      Eigen::Index at2 = 0;
      for (int p : idx) {
        const auto c = t.nodes_[p].value.cols();
        DGGEN_ADD_GRAD(t, p, g.middleCols(at2, c));
        at2 += c;
      }
    };
  }
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

Var Tape::slice_rows(Var x, int begin, int count) {
  check(begin >= 0 && count >= 0 && begin + count <= val(x).rows(),
        "slice_rows: range out of bounds");
  return emit(val(x).middleRows(begin, count), {x},
              [ix = x.idx, begin, count, io = size()](Tape& t) {
                if (!t.nodes_[ix].requires_grad) return;
                t.grad_ref(ix).middleRows(begin, count) += t.nodes_[io].grad;
              });
}

Var Tape::transpose(Var x) {
  return emit(val(x).transpose(), {x}, [ix = x.idx, io = size()](Tape& t) {
    DGGEN_ADD_GRAD(t, ix, t.nodes_[io].grad.transpose());
  });
}

Var Tape::gather_cols(Var x, std::vector<int> idx) {
  const Mat& xv = val(x);
  Mat out(xv.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    check(idx[k] >= 0 && idx[k] < xv.cols(), "gather_cols: index out of range");
    out.col(static_cast<Eigen::Index>(k)) = xv.col(idx[k]);
  }
  return emit(std::move(out), {x},
              [ix = x.idx, idx = std::move(idx), io = size()](Tape& t) {
                if (!t.nodes_[ix].requires_grad) return;
                const Mat& g = t.nodes_[io].grad;
                Mat& gx = t.grad_ref(ix);
                for (std::size_t k = 0; k < idx.size(); ++k)
                  gx.col(idx[k]) += g.col(static_cast<Eigen::Index>(k));
              });
}

Var Tape::pick_per_col(Var x, std::vector<int> rows) {
  const Mat& xv = val(x);
  check(static_cast<Eigen::Index>(rows.size()) == xv.cols(),
        "pick_per_col: one row index per column required");
  Mat out(1, xv.cols());
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    check(rows[j] >= 0 && rows[j] < xv.rows(), "pick_per_col: row out of range");
    out(0, j) = xv(rows[j], j);
  }
  return emit(std::move(out), {x},
              [ix = x.idx, rows = std::move(rows), io = size()](Tape& t) {
                if (!t.nodes_[ix].requires_grad) return;
                const Mat& g = t.nodes_[io].grad;
                Mat& gx = t.grad_ref(ix);
                for (Eigen::Index j = 0; j < g.cols(); ++j)
                  gx(rows[j], j) += g(0, j);
              });
}

Var Tape::sum_all(Var x) {
  Mat out(1, 1);
  out(0, 0) = val(x).sum();
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    const Mat& xv = t.nodes_[ix].value;
    DGGEN_ADD_GRAD(t, ix, Mat::Constant(xv.rows(), xv.cols(), t.nodes_[io].grad(0, 0)));
  });
}

Var Tape::colwise_logsumexp(Var x) {
  const Mat& xv = val(x);
  check(xv.rows() >= 1, "colwise_logsumexp: empty input");
  Mat out(1, xv.cols());
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    const double m = xv.col(j).maxCoeff();
    out(0, j) = m + std::log((xv.col(j).array() - m).exp().sum());
  }
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    const Mat& g = t.nodes_[io].grad;
    const Mat& xv2 = t.nodes_[ix].value;
    const Mat& lse = t.nodes_[io].value;
    Mat& gx = t.grad_ref(ix);
    for (Eigen::Index j = 0; j < xv2.cols(); ++j)
      gx.col(j) += g(0, j) * (xv2.col(j).array() - lse(0, j)).exp().matrix();
  });
}

Var Tape::softmax_cols(Var x) {
  const Mat& xv = val(x);
  Mat out(xv.rows(), xv.cols());
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    const Eigen::ArrayXd e = (xv.col(j).array() - xv.col(j).maxCoeff()).exp();
    out.col(j) = (e / e.sum()).matrix();
  }
  return emit(std::move(out), {x}, [ix = x.idx, io = size()](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    const Mat& g = t.nodes_[io].grad;
    const Mat& y = t.nodes_[io].value;
    Mat& gx = t.grad_ref(ix);
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double dot = g.col(j).dot(y.col(j));
      gx.col(j) += y.col(j).cwiseProduct(g.col(j) - Mat::Constant(y.rows(), 1, dot));
    }
  });
}

Var Tape::attn_scores(Var q, Var k, int slots) {
  const Mat& qv = val(q);
  const Mat& kv = val(k);
  check(slots >= 1, "attn_scores: slots must be positive");
  check(qv.rows() == kv.rows(), "attn_scores: feature dims differ");
  check(kv.cols() == qv.cols() * slots, "attn_scores: k must hold slots per query");
  Mat out(slots, qv.cols());
  for (Eigen::Index c = 0; c < qv.cols(); ++c)
    out.col(c) = kv.middleCols(c * slots, slots).transpose() * qv.col(c);
  return emit(std::move(out), {q, k},
              [iq = q.idx, ik = k.idx, slots, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                const Mat& qv2 = t.nodes_[iq].value;
                const Mat& kv2 = t.nodes_[ik].value;
                const bool need_q = t.nodes_[iq].requires_grad;
                const bool need_k = t.nodes_[ik].requires_grad;
                if (need_q) {
                  Mat& gq = t.grad_ref(iq);
                  for (Eigen::Index c = 0; c < qv2.cols(); ++c)
                    gq.col(c) += kv2.middleCols(c * slots, slots) * g.col(c);
                }
                if (need_k) {
                  Mat& gk = t.grad_ref(ik);
                  for (Eigen::Index c = 0; c < qv2.cols(); ++c)
                    gk.middleCols(c * slots, slots) +=
                        qv2.col(c) * g.col(c).transpose();
                }
              });
}

Var Tape::attn_mix(Var v, Var a, int slots) {
  const Mat& vv = val(v);
  const Mat& av = val(a);
  check(slots >= 1 && av.rows() == slots, "attn_mix: weight rows must equal slots");
  check(vv.cols() == av.cols() * slots, "attn_mix: v must hold slots per column");
  Mat out(vv.rows(), av.cols());
  for (Eigen::Index c = 0; c < av.cols(); ++c)
    out.col(c) = vv.middleCols(c * slots, slots) * av.col(c);
  return emit(std::move(out), {v, a},
              [iv = v.idx, ia = a.idx, slots, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                const Mat& vv2 = t.nodes_[iv].value;
                const Mat& av2 = t.nodes_[ia].value;
                if (t.nodes_[iv].requires_grad) {
                  Mat& gv = t.grad_ref(iv);
                  for (Eigen::Index c = 0; c < av2.cols(); ++c)
                    gv.middleCols(c * slots, slots) +=
                        g.col(c) * av2.col(c).transpose();
                }
                if (t.nodes_[ia].requires_grad) {
                  Mat& ga = t.grad_ref(ia);
                  for (Eigen::Index c = 0; c < av2.cols(); ++c)
                    ga.col(c) += vv2.middleCols(c * slots, slots).transpose() * g.col(c);
                }
              });
}

Var Tape::pairwise_relu_dot(Var a, Var d, Var w) {
  const Mat& av = val(a);
  const Mat& dv = val(d);
  const Mat& wv = val(w);
  check(av.rows() == dv.rows(), "pairwise_relu_dot: hidden dims differ");
  check(wv.rows() == 1 && wv.cols() == av.rows(),
        "pairwise_relu_dot: w must be [1 x hidden]");
  Mat out(dv.cols(), av.cols());
  Mat m(dv.rows(), dv.cols());
  for (Eigen::Index b = 0; b < av.cols(); ++b) {
    m = (dv.colwise() + av.col(b)).cwiseMax(0.0);
    out.col(b) = m.transpose() * wv.transpose();
  }
  return emit(std::move(out), {a, d, w},
              [ia = a.idx, id = d.idx, iw = w.idx, io = size()](Tape& t) {
                const Mat& g = t.nodes_[io].grad;
                const Mat& av2 = t.nodes_[ia].value;
                const Mat& dv2 = t.nodes_[id].value;
                const Mat& wv2 = t.nodes_[iw].value;
                const bool need_a = t.nodes_[ia].requires_grad;
                const bool need_d = t.nodes_[id].requires_grad;
                const bool need_w = t.nodes_[iw].requires_grad;
                // Recompute the per-source ReLU activations instead of
                // storing all B of them.
                Mat m2(dv2.rows(), dv2.cols());
                for (Eigen::Index b = 0; b < av2.cols(); ++b) {
                  m2 = (dv2.colwise() + av2.col(b)).cwiseMax(0.0);
                  const Mat mask = (m2.array() > 0.0).cast<double>();
                  const Mat masked =
                      (wv2.transpose() * g.col(b).transpose()).cwiseProduct(mask);
                  if (need_a) t.grad_ref(ia).col(b) += masked.rowwise().sum();
                  if (need_d) t.grad_ref(id) += masked;
                  if (need_w) t.grad_ref(iw) += (m2 * g.col(b)).transpose();
                }
              });
}

#undef DGGEN_ADD_GRAD

}  // namespace dggen::ad
