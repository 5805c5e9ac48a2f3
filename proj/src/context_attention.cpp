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

#include "actionnet/context_attention.hpp"

#include <cmath>

#include "actionnet/error.hpp"

namespace actionnet {

std::size_t input_dim(StreamKind kind) {
  return kind == StreamKind::kDynamic ? kDynamicInputDim : kStaticInputDim;
}

std::size_t embed_hidden_dim(StreamKind kind) {
  return kind == StreamKind::kDynamic ? 512 : 1024;
}

std::string_view to_string(StreamKind kind) {
  return kind == StreamKind::kDynamic ? "dynamic" : "static";
}

std::string_view to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::kCaa: return "caa";
    case AttentionVariant::kSau: return "sau";
    case AttentionVariant::kAvg: return "avg";
  }
  return "?";
}

LinearT<Tensor> init_linear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  LinearT<Tensor> layer{Tensor(in, out), Tensor(1, out)};
  for (auto& w : layer.weight.values()) w = dist(rng);
  return layer;
}

BranchParams init_branch(StreamKind kind, AttentionVariant variant, Rng& rng) {
  BranchParams b;
  b.kind = kind;
  b.embed1 = init_linear(input_dim(kind), embed_hidden_dim(kind), rng);
  b.embed2 = init_linear(embed_hidden_dim(kind), kEmbedDim, rng);
  if (variant != AttentionVariant::kSau) {
    b.gcn = GcnT<Tensor>{init_linear(kEmbedDim, kEmbedDim, rng).weight,
                         init_linear(kEmbedDim, kEmbedDim, rng).weight};
  }
  if (variant != AttentionVariant::kAvg) {
    b.attention = AttentionUnitT<Tensor>{init_linear(kFusedDim, kAttentionHiddenDim, rng),
                                         init_linear(kAttentionHiddenDim, 1, rng)};
  }
  return b;
}

void InstanceSet::validate() const {
  if (features.rows() == 0) {
    throw Error(ErrorCode::kEmptyInstanceSet, "video '" + video_id + "' has no " +
                                                  std::string(to_string(kind)) + " instances");
  }
  if (features.cols() != input_dim(kind)) {
    throw Error(ErrorCode::kBadDimension,
                std::string(to_string(kind)) + " features must be " +
                    std::to_string(input_dim(kind)) + "-d, got " + features.shape_str());
  }
}

AdjacencyPair build_adjacency(const Tensor& embedded, double kernel_scale) {
  if (!(kernel_scale > 0.0) || !std::isfinite(kernel_scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel scale K must be positive, got " + std::to_string(kernel_scale));
  }
  const std::size_t n = embedded.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyInstanceSet, "adjacency of an empty instance set");

  AdjacencyPair out;
  out.kernel_scale = kernel_scale;
  out.raw = Tensor(n, n);
  const double neg_inv_k = -1.0 / kernel_scale;
  for (std::size_t i = 0; i < n; ++i) {
    out.raw(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < embedded.cols(); ++k) {
        const double d = embedded(i, k) - embedded(j, k);
        acc += d * d;
      }
      out.raw(i, j) = out.raw(j, i) = std::exp(std::sqrt(acc) * neg_inv_k);
    }
  }

  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 1.0;
    for (std::size_t j = 0; j < n; ++j) deg += out.raw(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  out.normalized = Tensor(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.normalized(i, j) =
          (out.raw(i, j) + (i == j ? 1.0 : 0.0)) * (inv_sqrt_deg[i] * inv_sqrt_deg[j]);
  return out;
}

ad::Var linear(ad::Var x, const LinearT<ad::Var>& layer) {
  return ad::add(ad::matmul(x, layer.weight), layer.bias);
}

ad::Var embed(ad::Var x, const BranchVars& branch) {
  if (x.cols() != input_dim(branch.kind)) {
    throw Error(ErrorCode::kBadDimension,
                "embedding expects " + std::to_string(input_dim(branch.kind)) +
                    "-d input, got " + x.value().shape_str());
  }
  ad::Var h = ad::relu(linear(x, branch.embed1));
  return ad::relu(linear(h, branch.embed2));
}

ad::Var adjacency_node(ad::Var embedded, const AttentionOptions& options) {
  if (!(options.kernel_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel scale K must be positive, got " + std::to_string(options.kernel_scale));
  }
  if (options.adjacency_gradient) {
    ad::Var raw = ad::exp(ad::scale(ad::pairwise_distance(embedded), -1.0 / options.kernel_scale));
    return ad::sym_normalize(raw);
  }
  return embedded.graph().constant(build_adjacency(embedded.value(), options.kernel_scale).normalized);
}

ad::Var tcg_forward(ad::Var embedded, ad::Var normalized, const GcnT<ad::Var>& gcn) {
  const std::size_t n = embedded.rows();
  if (normalized.rows() != n || normalized.cols() != n) {
    throw Error(ErrorCode::kShapeMismatch, "adjacency " + normalized.value().shape_str() +
                                               " for " + std::to_string(n) + " instances");
  }
  ad::Var h1 = ad::relu(ad::matmul(normalized, ad::matmul(embedded, gcn.layer1)));
  return ad::relu(ad::matmul(normalized, ad::matmul(h1, gcn.layer2)));
}

AttentionTrace attend_aggregate(ad::Var embedded, ad::Var context,
                                const std::optional<AttentionUnitT<ad::Var>>& unit,
                                const AttentionOptions& options) {
  const std::size_t n = embedded.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyInstanceSet, "attention over zero instances");

  AttentionTrace trace;
  trace.embedded = embedded;
  switch (options.variant) {
    case AttentionVariant::kCaa:
    case AttentionVariant::kAvg:
      if (!context.valid() || context.rows() != n) {
        throw Error(ErrorCode::kShapeMismatch, "context features missing or misaligned");
      }
      trace.context = context;
      trace.fused = ad::concat_cols(embedded, context);
      break;
    case AttentionVariant::kSau:
      trace.fused = ad::concat_cols(embedded, embedded);
      break;
  }

  if (options.variant == AttentionVariant::kAvg) {
    trace.weights = embedded.graph().constant(Tensor(n, 1, 1.0 / static_cast<double>(n)));
  } else {
    if (!unit) throw Error(ErrorCode::kInvalidArgument, "attention unit parameters missing");
    ad::Var hidden = ad::relu(linear(trace.fused, unit->hidden));
    ad::Var scores = linear(hidden, unit->score);  // N x 1
    trace.weights = options.normalization == WeightNormalization::kSoftmax ? ad::softmax(scores)
                                                                           : ad::sigmoid(scores);
  }
  trace.stream_feature = ad::weighted_row_sum(trace.fused, trace.weights);
  return trace;
}

AttentionTrace run_branch(const BranchVars& branch, ad::Var features, const AttentionOptions& options) {
  if (features.rows() == 0) {
    throw Error(ErrorCode::kEmptyInstanceSet,
                std::string(to_string(branch.kind)) + " stream has no instances");
  }
  ad::Var embedded = embed(features, branch);
  ad::Var context;
  if (options.variant != AttentionVariant::kSau) {
    if (!branch.gcn) throw Error(ErrorCode::kInvalidArgument, "GCN parameters missing");
    context = tcg_forward(embedded, adjacency_node(embedded, options), *branch.gcn);
  }
  return attend_aggregate(embedded, context, branch.attention, options);
}

AttentionOutput to_output(const AttentionTrace& trace) {
  AttentionOutput out;
  out.stream_feature = trace.stream_feature.value();
  out.weights = trace.weights.value();
  out.fused = trace.fused.value();
  if (trace.context.valid()) out.context = trace.context.value();
  out.embedded = trace.embedded.value();
  return out;
}

}  // namespace actionnet
