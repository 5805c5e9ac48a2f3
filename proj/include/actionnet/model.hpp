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

// Hybrid dynamic-static network: one context-attention branch per stream
// (unshared parameters), concatenation of the 512-d stream features and a
// two-layer regression head with sigmoid output.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actionnet/autodiff.hpp"
#include "actionnet/context_attention.hpp"
#include "actionnet/random.hpp"
#include "actionnet/tensor.hpp"

namespace actionnet {

// DS: dynamic stream only, SS: static stream only, TS: both.
enum class Streams { kDynamic, kStatic, kTwoStream };
std::string_view to_string(Streams s);

inline constexpr std::size_t kHeadHiddenDim = 128;

struct ModelConfig {
  Streams streams = Streams::kTwoStream;
  AttentionVariant attention = AttentionVariant::kCaa;
  double kernel_scale = 1.0;
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;
  bool adjacency_gradient = false;
  WeightNormalization weight_normalization = WeightNormalization::kSoftmax;

  bool uses_dynamic() const { return streams != Streams::kStatic; }
  bool uses_static() const { return streams != Streams::kDynamic; }
  // 1024 for TS, 512 for the single-stream ablations.
  std::size_t head_input_dim() const {
    return streams == Streams::kTwoStream ? 2 * kFusedDim : kFusedDim;
  }
  AttentionOptions attention_options() const;
  void validate() const;
};

enum class ParamGroup { kAttention, kPrediction };
std::string_view to_string(ParamGroup g);

template <class T>
struct ModelT {
  std::optional<BranchT<T>> dynamic;
  std::optional<BranchT<T>> stat;
  LinearT<T> head1;  // head_input_dim -> 128
  LinearT<T> head2;  // 128 -> 1
};

using ModelParams = ModelT<Tensor>;
using ModelVars = ModelT<ad::Var>;

// f(name, param, group) for every tensor, in checkpoint order: dynamic
// branch, static branch, regression head.
template <class Model, class F>
void for_each_param(Model& m, F&& f) {
  auto attention = [&f](const std::string& name, auto& p) { f(name, p, ParamGroup::kAttention); };
  if (m.dynamic) visit_branch(*m.dynamic, "dynamic", attention);
  if (m.stat) visit_branch(*m.stat, "static", attention);
  f(std::string("head.fc1.weight"), m.head1.weight, ParamGroup::kPrediction);
  f(std::string("head.fc1.bias"), m.head1.bias, ParamGroup::kPrediction);
  f(std::string("head.fc2.weight"), m.head2.weight, ParamGroup::kPrediction);
  f(std::string("head.fc2.bias"), m.head2.bias, ParamGroup::kPrediction);
}

template <class U, class T, class F>
ModelT<U> map_params(const ModelT<T>& m, F&& f) {
  auto attention = [&f](const std::string& name, const T& p) -> U {
    return f(name, p, ParamGroup::kAttention);
  };
  ModelT<U> out;
  if (m.dynamic) out.dynamic = map_branch<U>(*m.dynamic, "dynamic", attention);
  if (m.stat) out.stat = map_branch<U>(*m.stat, "static", attention);
  out.head1 = {f(std::string("head.fc1.weight"), m.head1.weight, ParamGroup::kPrediction),
               f(std::string("head.fc1.bias"), m.head1.bias, ParamGroup::kPrediction)};
  out.head2 = {f(std::string("head.fc2.weight"), m.head2.weight, ParamGroup::kPrediction),
               f(std::string("head.fc2.bias"), m.head2.bias, ParamGroup::kPrediction)};
  return out;
}

// Deterministic given the rng state.
ModelParams init_params(const ModelConfig& config, Rng& rng);
// Zero-valued parameters with the shapes `config` implies.
ModelParams param_layout(const ModelConfig& config);
ModelParams zeros_like(const ModelParams& params);
bool bit_equal(const ModelParams& a, const ModelParams& b);

// Leaves refer to `params` without copying; `params` must outlive `graph`.
ModelVars bind_params(ad::Graph& graph, const ModelParams& params, bool requires_grad);
// Gradient of the graph's last backward root w.r.t. every bound parameter.
// Moves the gradients out of `graph`.
ModelParams collect_gradients(ad::Graph& graph, const ModelVars& vars);

struct StreamInputs {
  const Tensor* dynamic = nullptr;  // N x 1024
  const Tensor* stat = nullptr;     // M x 2048
};

struct ForwardTrace {
  ad::Var score;  // 1 x 1, in (0, 1)
  std::optional<AttentionTrace> dynamic;
  std::optional<AttentionTrace> stat;
};

// s = sigmoid(FC2(dropout(ReLU(FC1([f_D | f_S]))))). Inputs for streams the
// config does not use are ignored.
ForwardTrace forward(const ModelVars& vars, StreamInputs inputs, const ModelConfig& config,
                     ad::Mode mode, Rng& dropout_rng);

struct Prediction {
  double score = 0.0;
  std::optional<AttentionOutput> dynamic;
  std::optional<AttentionOutput> stat;
};

// Eval-mode forward without gradient bookkeeping.
Prediction predict(const ModelParams& params, StreamInputs inputs, const ModelConfig& config);

struct ParamCountEntry {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t count = 0;
  ParamGroup group = ParamGroup::kAttention;
};

struct ParamCount {
  std::vector<ParamCountEntry> entries;
  std::size_t attention = 0;
  std::size_t prediction = 0;
  std::size_t total = 0;
};

ParamCount count_params(const ModelParams& params);

// Parameter total stated for the published two-stream model.
inline constexpr double kReferenceParamCount = 3.54e6;

// --- ANPW checkpoint ---------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

void save_params(const std::filesystem::path& path, const ModelParams& params);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);
// Reads a checkpoint and checks names and shapes against `config`.
ModelParams load_params(const std::filesystem::path& path, const ModelConfig& config);

}  // namespace actionnet
