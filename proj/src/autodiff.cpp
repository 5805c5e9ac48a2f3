// Copyright 2026 The ActionNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "actionnet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "actionnet/error.hpp"

namespace actionnet::ad {

std::string_view to_string(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kScale: return "scale";
    case Op::kExp: return "exp";
    case Op::kRelu: return "relu";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSoftmax: return "softmax";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kWeightedRowSum: return "weighted_row_sum";
    case Op::kDropout: return "dropout";
    case Op::kPairwiseDistance: return "pairwise_distance";
    case Op::kSymNormalize: return "sym_normalize";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::leaf_view(const Tensor& value, bool requires_grad) {
  Node n;
  n.view = &value;
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Graph::Node& Graph::node(Var v) const {
  if (v.graph_ != this || v.id_ >= nodes_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "variable does not belong to this graph");
  }
  return nodes_[v.id_];
}

Tensor Graph::gradient(Var v) const {
  const Node& n = node(v);
  if (!n.has_grad) return Tensor(n.get().rows(), n.get().cols());
  return n.grad;
}

Tensor Graph::take_gradient(Var v) {
  node(v);
  Node& n = nodes_[v.id_];
  if (!n.has_grad) return Tensor(n.get().rows(), n.get().cols());
  n.has_grad = false;
  return std::move(n.grad);
}

Var Graph::record(Op op, Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (Var p : parents) {
    const Node& pn = node(p);
    n.parents.push_back(p.id_);
    n.requires_grad = n.requires_grad || pn.requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Graph::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Graph::accumulate(std::size_t id, Tensor&& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = std::move(g);
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Graph::backward(Var root) {
  const Node& r = node(root);
  if (r.get().rows() != 1 || r.get().cols() != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "backward root must be 1x1, got " + r.get().shape_str());
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (!r.requires_grad) return;
  nodes_[root.id_].grad = Tensor::ones(1, 1);
  nodes_[root.id_].has_grad = true;
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

enum class Broadcast { kSame, kScalar, kRow, kCol };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* what) {
  if (a.same_shape(b)) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::kCol;
  throw Error(ErrorCode::kShapeMismatch,
              std::string(what) + ": cannot broadcast " + b.shape_str() + " to " + a.shape_str());
}

inline double at(const Tensor& b, Broadcast kind, std::size_t r, std::size_t c) {
  switch (kind) {
    case Broadcast::kSame: return b(r, c);
    case Broadcast::kScalar: return b[0];
    case Broadcast::kRow: return b[c];
    case Broadcast::kCol: return b[r];
  }
  return 0.0;
}

// Sums a full-shape gradient down to the broadcast operand's shape.
Tensor reduce_to(const Tensor& g, Broadcast kind, const Tensor& b) {
  if (kind == Broadcast::kSame) return g;
  Tensor out(b.rows(), b.cols());
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      switch (kind) {
        case Broadcast::kScalar: out[0] += g(r, c); break;
        case Broadcast::kRow: out[c] += g(r, c); break;
        case Broadcast::kCol: out[r] += g(r, c); break;
        case Broadcast::kSame: break;
      }
    }
  }
  return out;
}

template <class F>
Tensor map(const Tensor& a, F&& f) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = a.graph();
  Tensor value = actionnet::matmul(a.value(), b.value());
  return g.record(Op::kMatMul, std::move(value), {a, b}, [](Graph& gr, std::size_t self) {
    const std::size_t ia = gr.parent(self, 0);
    const std::size_t ib = gr.parent(self, 1);
    const Tensor& grad = gr.grad_of(self);
    if (gr.needs_grad(ia)) gr.accumulate(ia, matmul_nt(grad, gr.value_of(ib)));
    if (gr.needs_grad(ib)) gr.accumulate(ib, matmul_tn(gr.value_of(ia), grad));
  });
}

namespace {

template <class Fwd>
Var binary(Op op, Var a, Var b, const char* what, Fwd&& fwd) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast kind = broadcast_kind(av, bv, what);
  Tensor value(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) value(r, c) = fwd(av(r, c), at(bv, kind, r, c));

  return a.graph().record(op, std::move(value), {a, b}, [op, kind](Graph& gr, std::size_t self) {
    const std::size_t ia = gr.parent(self, 0);
    const std::size_t ib = gr.parent(self, 1);
    const Tensor& grad = gr.grad_of(self);
    const Tensor& x = gr.value_of(ia);
    const Tensor& y = gr.value_of(ib);
    if (gr.needs_grad(ia)) {
      if (op == Op::kMul) {
        Tensor da(grad.rows(), grad.cols());
        for (std::size_t r = 0; r < grad.rows(); ++r)
          for (std::size_t c = 0; c < grad.cols(); ++c) da(r, c) = grad(r, c) * at(y, kind, r, c);
        gr.accumulate(ia, std::move(da));
      } else {
        gr.accumulate(ia, grad);
      }
    }
    if (gr.needs_grad(ib)) {
      if (op == Op::kMul) {
        Tensor full(grad.rows(), grad.cols());
        for (std::size_t i = 0; i < grad.size(); ++i) full[i] = grad[i] * x[i];
        gr.accumulate(ib, reduce_to(full, kind, y));
      } else if (op == Op::kSub) {
        gr.accumulate(ib, reduce_to(grad, kind, y) * -1.0);
      } else {
        gr.accumulate(ib, reduce_to(grad, kind, y));
      }
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(Op::kAdd, a, b, "add", [](double x, double y) { return x + y; });
}

Var sub(Var a, Var b) {
  return binary(Op::kSub, a, b, "sub", [](double x, double y) { return x - y; });
}

Var mul(Var a, Var b) {
  return binary(Op::kMul, a, b, "mul", [](double x, double y) { return x * y; });
}

Var scale(Var a, double s) {
  return a.graph().record(Op::kScale, a.value() * s, {a}, [s](Graph& gr, std::size_t self) {
    gr.accumulate(gr.parent(self, 0), gr.grad_of(self) * s);
  });
}

namespace {

// Unary op whose derivative is expressed through the input x and output y.
template <class Fwd, class Deriv>
Var unary(Op op, Var a, Fwd&& fwd, Deriv deriv) {
  Tensor value = map(a.value(), fwd);
  return a.graph().record(op, std::move(value), {a}, [deriv](Graph& gr, std::size_t self) {
    const std::size_t ia = gr.parent(self, 0);
    const Tensor& grad = gr.grad_of(self);
    const Tensor& x = gr.value_of(ia);
    const Tensor& y = gr.value_of(self);
    Tensor da(grad.rows(), grad.cols());
    for (std::size_t i = 0; i < grad.size(); ++i) da[i] = grad[i] * deriv(x[i], y[i]);
    gr.accumulate(ia, std::move(da));
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var exp(Var a) {
  return unary(
      Op::kExp, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var relu(Var a) {
  return unary(
      Op::kRelu, a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(Op::kSigmoid, a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      Op::kTanh, a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var concat_cols(Var a, Var b) {
  Tensor value = actionnet::concat_cols(a.value(), b.value());
  return a.graph().record(Op::kConcatCols, std::move(value), {a, b}, [](Graph& gr, std::size_t self) {
    const std::size_t ia = gr.parent(self, 0);
    const std::size_t ib = gr.parent(self, 1);
    const Tensor& grad = gr.grad_of(self);
    const std::size_t p = gr.value_of(ia).cols();
    const std::size_t q = gr.value_of(ib).cols();
    if (gr.needs_grad(ia)) {
      Tensor da(grad.rows(), p);
      for (std::size_t r = 0; r < grad.rows(); ++r)
        for (std::size_t c = 0; c < p; ++c) da(r, c) = grad(r, c);
      gr.accumulate(ia, std::move(da));
    }
    if (gr.needs_grad(ib)) {
      Tensor db(grad.rows(), q);
      for (std::size_t r = 0; r < grad.rows(); ++r)
        for (std::size_t c = 0; c < q; ++c) db(r, c) = grad(r, p + c);
      gr.accumulate(ib, std::move(db));
    }
  });
}

Var softmax(Var x) {
  const Tensor& xv = x.value();
  if (xv.rows() != 1 && xv.cols() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "softmax expects a vector, got " + xv.shape_str());
  }
  if (xv.empty()) throw Error(ErrorCode::kShapeMismatch, "softmax of an empty vector");
  const double m = *std::max_element(xv.values().begin(), xv.values().end());
  Tensor value(xv.rows(), xv.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    value[i] = std::exp(xv[i] - m);
    total += value[i];
  }
  value *= 1.0 / total;
  return x.graph().record(Op::kSoftmax, std::move(value), {x}, [](Graph& gr, std::size_t self) {
    const Tensor& grad = gr.grad_of(self);
    const Tensor& y = gr.value_of(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += grad[i] * y[i];
    Tensor dx(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (grad[i] - dot);
    gr.accumulate(gr.parent(self, 0), std::move(dx));
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.graph().record(Op::kSum, Tensor(1, 1, total), {x}, [](Graph& gr, std::size_t self) {
    const std::size_t ix = gr.parent(self, 0);
    const Tensor& xv = gr.value_of(ix);
    gr.accumulate(ix, Tensor(xv.rows(), xv.cols(), gr.grad_of(self)[0]));
  });
}

Var mean(Var x) {
  const Tensor& xv = x.value();
  if (xv.empty()) throw Error(ErrorCode::kShapeMismatch, "mean of an empty tensor");
  double total = 0.0;
  for (double v : xv.values()) total += v;
  const double n = static_cast<double>(xv.size());
  return x.graph().record(Op::kMean, Tensor(1, 1, total / n), {x}, [n](Graph& gr, std::size_t self) {
    const std::size_t ix = gr.parent(self, 0);
    const Tensor& xv = gr.value_of(ix);
    gr.accumulate(ix, Tensor(xv.rows(), xv.cols(), gr.grad_of(self)[0] / n));
  });
}

Var weighted_row_sum(Var x, Var weights) {
  const Tensor& xv = x.value();
  const Tensor& wv = weights.value();
  if (wv.cols() != 1 || wv.rows() != xv.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "weighted_row_sum: weights " + wv.shape_str() + " for rows of " + xv.shape_str());
  }
  Tensor value = matmul_tn(wv, xv);
  return x.graph().record(
      Op::kWeightedRowSum, std::move(value), {x, weights}, [](Graph& gr, std::size_t self) {
        const std::size_t ix = gr.parent(self, 0);
        const std::size_t iw = gr.parent(self, 1);
        const Tensor& grad = gr.grad_of(self);  // 1 x D
        if (gr.needs_grad(ix)) gr.accumulate(ix, actionnet::matmul(gr.value_of(iw), grad));
        if (gr.needs_grad(iw)) gr.accumulate(iw, matmul_nt(gr.value_of(ix), grad));
      });
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::kEval || rate == 0.0) return x;
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = keep(rng) ? keep_scale : 0.0;
  Tensor value(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < value.size(); ++i) value[i] = xv[i] * mask[i];
  return x.graph().record(Op::kDropout, std::move(value), {x},
                          [mask = std::move(mask)](Graph& gr, std::size_t self) {
                            const Tensor& grad = gr.grad_of(self);
                            Tensor dx(grad.rows(), grad.cols());
                            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = grad[i] * mask[i];
                            gr.accumulate(gr.parent(self, 0), std::move(dx));
                          });
}

Var pairwise_distance(Var x) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows();
  Tensor value(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < xv.cols(); ++k) {
        const double d = xv(i, k) - xv(j, k);
        acc += d * d;
      }
      value(i, j) = value(j, i) = std::sqrt(acc);
    }
  }
  return x.graph().record(Op::kPairwiseDistance, std::move(value), {x}, [](Graph& gr, std::size_t self) {
    const std::size_t ix = gr.parent(self, 0);
    const Tensor& xv = gr.value_of(ix);
    const Tensor& dist = gr.value_of(self);
    const Tensor& grad = gr.grad_of(self);
    Tensor dx(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      for (std::size_t j = i + 1; j < xv.rows(); ++j) {
        if (dist(i, j) == 0.0) continue;
        const double coef = (grad(i, j) + grad(j, i)) / dist(i, j);
        for (std::size_t k = 0; k < xv.cols(); ++k) {
          const double d = coef * (xv(i, k) - xv(j, k));
          dx(i, k) += d;
          dx(j, k) -= d;
        }
      }
    }
    gr.accumulate(ix, std::move(dx));
  });
}

Var sym_normalize(Var a) {
  const Tensor& av = a.value();
  if (av.rows() != av.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "sym_normalize expects a square matrix, got " + av.shape_str());
  }
  const std::size_t n = av.rows();
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 1.0;
    for (std::size_t j = 0; j < n; ++j) deg += av(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Tensor value(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      value(i, j) = (av(i, j) + (i == j ? 1.0 : 0.0)) * (inv_sqrt_deg[i] * inv_sqrt_deg[j]);

  return a.graph().record(
      Op::kSymNormalize, std::move(value), {a},
      [inv_sqrt_deg = std::move(inv_sqrt_deg)](Graph& gr, std::size_t self) {
        const Tensor& grad = gr.grad_of(self);
        const Tensor& out = gr.value_of(self);
        const std::size_t n = out.rows();
        // d(out_ij)/d(deg_i) = -out_ij / (2 deg_i); every entry of row i of
        // A + I feeds deg_i.
        std::vector<double> d_deg(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double t = grad(i, j) * out(i, j);
            d_deg[i] += t;
            d_deg[j] += t;
          }
        }
        Tensor da(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double deg_term = -0.5 * d_deg[i] * inv_sqrt_deg[i] * inv_sqrt_deg[i];
          for (std::size_t j = 0; j < n; ++j) {
            da(i, j) = grad(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j] + deg_term;
          }
        }
        gr.accumulate(gr.parent(self, 0), std::move(da));
      });
}

}  // namespace actionnet::ad
