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

// Context-aware attention over the instances (segments or frames) of one
// stream: two-layer embedding, a two-layer GCN over an exponential-kernel
// instance graph, and an attention unit that pools the fused
// [embedded | context] features into one 512-d stream feature.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "actionnet/autodiff.hpp"
#include "actionnet/random.hpp"
#include "actionnet/tensor.hpp"

namespace actionnet {

enum class StreamKind { kDynamic, kStatic };

inline constexpr std::size_t kDynamicInputDim = 1024;
inline constexpr std::size_t kStaticInputDim = 2048;
inline constexpr std::size_t kEmbedDim = 256;
inline constexpr std::size_t kFusedDim = 2 * kEmbedDim;
inline constexpr std::size_t kAttentionHiddenDim = 256;

std::size_t input_dim(StreamKind kind);
// Width of the first embedding layer: 512 for dynamic, 1024 for static.
std::size_t embed_hidden_dim(StreamKind kind);
std::string_view to_string(StreamKind kind);

// CAA: context-aware attention. SAU: the same attention unit fed with
// [embedded | embedded], no graph context. AVG: uniform weights 1/N.
enum class AttentionVariant { kCaa, kSau, kAvg };
std::string_view to_string(AttentionVariant v);

// How raw attention scores become instance weights.
enum class WeightNormalization { kSoftmax, kSigmoid };

template <class T>
struct LinearT {
  T weight;  // in x out
  T bias;    // 1 x out
};

template <class T>
struct GcnT {
  T layer1;  // 256 x 256, no bias
  T layer2;
};

template <class T>
struct AttentionUnitT {
  LinearT<T> hidden;  // 512 -> 256, ReLU
  LinearT<T> score;   // 256 -> 1
};

template <class T>
struct BranchT {
  StreamKind kind = StreamKind::kDynamic;
  LinearT<T> embed1;
  LinearT<T> embed2;
  std::optional<GcnT<T>> gcn;                   // absent for SAU
  std::optional<AttentionUnitT<T>> attention;   // absent for AVG
};

using BranchParams = BranchT<Tensor>;
using BranchVars = BranchT<ad::Var>;

// Calls f(name, param) for every tensor of a branch in a fixed order.
// Works for const and non-const branches of any element type.
template <class Branch, class F>
void visit_branch(Branch& b, const std::string& prefix, F&& f) {
  f(prefix + ".embed1.weight", b.embed1.weight);
  f(prefix + ".embed1.bias", b.embed1.bias);
  f(prefix + ".embed2.weight", b.embed2.weight);
  f(prefix + ".embed2.bias", b.embed2.bias);
  if (b.gcn) {
    f(prefix + ".gcn1.weight", b.gcn->layer1);
    f(prefix + ".gcn2.weight", b.gcn->layer2);
  }
  if (b.attention) {
    f(prefix + ".att_hidden.weight", b.attention->hidden.weight);
    f(prefix + ".att_hidden.bias", b.attention->hidden.bias);
    f(prefix + ".att_score.weight", b.attention->score.weight);
    f(prefix + ".att_score.bias", b.attention->score.bias);
  }
}

// Same structure, element type mapped through f(name, const T&) -> U.
template <class U, class T, class F>
BranchT<U> map_branch(const BranchT<T>& b, const std::string& prefix, F&& f) {
  BranchT<U> out;
  out.kind = b.kind;
  out.embed1 = {f(prefix + ".embed1.weight", b.embed1.weight), f(prefix + ".embed1.bias", b.embed1.bias)};
  out.embed2 = {f(prefix + ".embed2.weight", b.embed2.weight), f(prefix + ".embed2.bias", b.embed2.bias)};
  if (b.gcn) {
    out.gcn = GcnT<U>{f(prefix + ".gcn1.weight", b.gcn->layer1), f(prefix + ".gcn2.weight", b.gcn->layer2)};
  }
  if (b.attention) {
    out.attention = AttentionUnitT<U>{
        {f(prefix + ".att_hidden.weight", b.attention->hidden.weight),
         f(prefix + ".att_hidden.bias", b.attention->hidden.bias)},
        {f(prefix + ".att_score.weight", b.attention->score.weight),
         f(prefix + ".att_score.bias", b.attention->score.bias)}};
  }
  return out;
}

// Weights ~ U(-sqrt(1/fan_in), +sqrt(1/fan_in)), biases 0.
LinearT<Tensor> init_linear(std::size_t in, std::size_t out, Rng& rng);
BranchParams init_branch(StreamKind kind, AttentionVariant variant, Rng& rng);

// Features of one stream of one video.
struct InstanceSet {
  Tensor features;  // N x D
  StreamKind kind = StreamKind::kDynamic;
  std::string video_id;

  // N >= 1 and D matches the stream kind.
  void validate() const;
};

struct AdjacencyPair {
  Tensor raw;         // exp(-||f_i - f_j|| / K)
  Tensor normalized;  // D^{-1/2} (raw + I) D^{-1/2}
  double kernel_scale = 1.0;
};

AdjacencyPair build_adjacency(const Tensor& embedded, double kernel_scale);

struct AttentionOptions {
  AttentionVariant variant = AttentionVariant::kCaa;
  double kernel_scale = 1.0;
  // When false the instance graph is a constant of the forward pass.
  bool adjacency_gradient = false;
  WeightNormalization normalization = WeightNormalization::kSoftmax;
};

ad::Var linear(ad::Var x, const LinearT<ad::Var>& layer);

// N x D -> N x 256, ReLU after both layers.
ad::Var embed(ad::Var x, const BranchVars& branch);

// Normalized adjacency as a graph node (constant unless
// options.adjacency_gradient).
ad::Var adjacency_node(ad::Var embedded, const AttentionOptions& options);

// H1 = ReLU(Â H0 W1), H2 = ReLU(Â H1 W2); returns H2.
ad::Var tcg_forward(ad::Var embedded, ad::Var normalized, const GcnT<ad::Var>& gcn);

struct AttentionTrace {
  ad::Var stream_feature;  // 1 x 512
  ad::Var weights;         // N x 1
  ad::Var fused;           // N x 512
  ad::Var context;         // N x 256; invalid for SAU
  ad::Var embedded;        // N x 256
};

AttentionTrace attend_aggregate(ad::Var embedded, ad::Var context,
                                const std::optional<AttentionUnitT<ad::Var>>& unit,
                                const AttentionOptions& options);

// Whole module for one stream: embed, graph context, attention pooling.
AttentionTrace run_branch(const BranchVars& branch, ad::Var features, const AttentionOptions& options);

struct AttentionOutput {
  Tensor stream_feature;
  Tensor weights;
  Tensor fused;
  Tensor context;  // empty for SAU
  Tensor embedded;
};

AttentionOutput to_output(const AttentionTrace& trace);

}  // namespace actionnet
