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

// Tape-style reverse-mode differentiation over dense 2-D tensors.
//
// A Graph records every node in creation order. Because a node can only
// reference nodes created before it, walking the tape backwards is a valid
// reverse-topological order, and gradients are accumulated into each parent
// in a fixed, reproducible order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <string_view>
#include <vector>

#include "actionnet/random.hpp"
#include "actionnet/tensor.hpp"

namespace actionnet::ad {

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kExp,
  kRelu,
  kSigmoid,
  kTanh,
  kConcatCols,
  kSoftmax,
  kSum,
  kMean,
  kWeightedRowSum,
  kDropout,
  kPairwiseDistance,
  kSymNormalize,
};

std::string_view to_string(Op op);

enum class Mode { kTrain, kEval };

class Graph;

// Lightweight handle to a node of a Graph. Valid as long as the graph lives.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return graph_ != nullptr; }
  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = std::numeric_limits<std::size_t>::max();
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var parameter(Tensor value) { return leaf(std::move(value), true); }
  Var leaf(Tensor value, bool requires_grad);
  // Leaf that refers to `value` without copying; it must outlive the graph.
  Var leaf_view(const Tensor& value, bool requires_grad);

  const Tensor& value(Var v) const { return node(v).get(); }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  Op op(Var v) const { return node(v).op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Total derivative of the last backward() root w.r.t. v. Zeros when v was
  // not reached (or does not require a gradient).
  Tensor gradient(Var v) const;
  // Same, but moves the stored gradient out of the graph.
  Tensor take_gradient(Var v);

  // Seeds d(root)/d(root) = 1 and propagates through the tape in reverse
  // creation order. Earlier gradients are cleared first. Root must be 1x1.
  void backward(Var root);

  // --- op construction interface ---
  Var record(Op op, Tensor value, std::initializer_list<Var> parents, BackwardFn backward);
  const Tensor& value_of(std::size_t id) const { return nodes_[id].get(); }
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  void accumulate(std::size_t id, const Tensor& g);
  void accumulate(std::size_t id, Tensor&& g);
  std::size_t parent(std::size_t id, std::size_t k) const { return nodes_[id].parents[k]; }

 private:
  struct Node {
    Tensor value;
    const Tensor* view = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Op op = Op::kLeaf;
    std::vector<std::size_t> parents;
    BackwardFn backward;

    const Tensor& get() const { return view != nullptr ? *view : value; }
  };

  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }

// Matrix product, [m x k] * [k x n].
Var matmul(Var a, Var b);

// Entrywise binary ops. `b` may match `a`'s shape or broadcast from a
// scalar (1x1), a row vector (1 x cols) or a column vector (rows x 1).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var scale(Var a, double s);
Var exp(Var a);
// Subgradient at exactly 0 is 0.
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);

Var concat_cols(Var a, Var b);

// Softmax over every entry of a vector shaped m x 1 or 1 x n, computed
// with max subtraction.
Var softmax(Var x);

Var sum(Var x);
Var mean(Var x);
// x: N x D, weights: N x 1 -> 1 x D, sum_i w_i * x_i.
Var weighted_row_sum(Var x, Var weights);

// Inverted dropout. Eval mode or rate 0 returns `x` untouched.
Var dropout(Var x, double rate, Mode mode, Rng& rng);

// N x D -> N x N Euclidean distances between rows. The derivative of a
// zero distance is taken as 0.
Var pairwise_distance(Var x);

// D^{-1/2} (A + I) D^{-1/2} with D the row-sum degree of A + I.
Var sym_normalize(Var a);

}  // namespace actionnet::ad
