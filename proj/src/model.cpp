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

#include "actionnet/model.hpp"

#include <cmath>

#include "actionnet/error.hpp"

namespace actionnet {

std::string_view to_string(Streams s) {
  switch (s) {
    case Streams::kDynamic: return "ds";
    case Streams::kStatic: return "ss";
    case Streams::kTwoStream: return "ts";
  }
  return "?";
}

std::string_view to_string(ParamGroup g) {
  return g == ParamGroup::kAttention ? "attention" : "prediction";
}

AttentionOptions ModelConfig::attention_options() const {
  AttentionOptions o;
  o.variant = attention;
  o.kernel_scale = kernel_scale;
  o.adjacency_gradient = adjacency_gradient;
  o.normalization = weight_normalization;
  return o;
}

void ModelConfig::validate() const {
  if (!(kernel_scale > 0.0) || !std::isfinite(kernel_scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel scale K must be positive, got " + std::to_string(kernel_scale));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "dropout rate must be in [0, 1), got " + std::to_string(dropout_rate));
  }
}

ModelParams init_params(const ModelConfig& config, Rng& rng) {
  config.validate();
  ModelParams p;
  if (config.uses_dynamic()) p.dynamic = init_branch(StreamKind::kDynamic, config.attention, rng);
  if (config.uses_static()) p.stat = init_branch(StreamKind::kStatic, config.attention, rng);
  p.head1 = init_linear(config.head_input_dim(), kHeadHiddenDim, rng);
  p.head2 = init_linear(kHeadHiddenDim, 1, rng);
  return p;
}

ModelParams param_layout(const ModelConfig& config) {
  Rng rng(0);
  return zeros_like(init_params(config, rng));
}

ModelParams zeros_like(const ModelParams& params) {
  return map_params<Tensor>(params, [](const std::string&, const Tensor& t, ParamGroup) {
    return Tensor(t.rows(), t.cols());
  });
}

bool bit_equal(const ModelParams& a, const ModelParams& b) {
  std::vector<const Tensor*> lhs;
  std::vector<const Tensor*> rhs;
  for_each_param(a, [&](const std::string&, const Tensor& t, ParamGroup) { lhs.push_back(&t); });
  for_each_param(b, [&](const std::string&, const Tensor& t, ParamGroup) { rhs.push_back(&t); });
  if (lhs.size() != rhs.size()) return false;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (!bit_equal(*lhs[i], *rhs[i])) return false;
  }
  return true;
}

ModelVars bind_params(ad::Graph& graph, const ModelParams& params, bool requires_grad) {
  return map_params<ad::Var>(params, [&](const std::string&, const Tensor& t, ParamGroup) {
    return graph.leaf_view(t, requires_grad);
  });
}

ModelParams collect_gradients(ad::Graph& graph, const ModelVars& vars) {
  return map_params<Tensor>(vars, [&](const std::string&, const ad::Var& v, ParamGroup) {
    return graph.take_gradient(v);
  });
}

namespace {

ad::Var stream_input(ad::Graph& graph, const Tensor* features, StreamKind kind) {
  if (features == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "configuration requires the " + std::string(to_string(kind)) + " stream");
  }
  InstanceSet{*features, kind, ""}.validate();
  return graph.leaf_view(*features, false);
}

}  // namespace

ForwardTrace forward(const ModelVars& vars, StreamInputs inputs, const ModelConfig& config,
                     ad::Mode mode, Rng& dropout_rng) {
  ad::Graph& graph = vars.head1.weight.graph();
  const AttentionOptions options = config.attention_options();

  ForwardTrace trace;
  ad::Var combined;
  if (config.uses_dynamic()) {
    if (!vars.dynamic) throw Error(ErrorCode::kInvalidArgument, "dynamic branch parameters missing");
    ad::Var x = stream_input(graph, inputs.dynamic, StreamKind::kDynamic);
    trace.dynamic = run_branch(*vars.dynamic, x, options);
    combined = trace.dynamic->stream_feature;
  }
  if (config.uses_static()) {
    if (!vars.stat) throw Error(ErrorCode::kInvalidArgument, "static branch parameters missing");
    ad::Var x = stream_input(graph, inputs.stat, StreamKind::kStatic);
    trace.stat = run_branch(*vars.stat, x, options);
    combined = combined.valid() ? ad::concat_cols(combined, trace.stat->stream_feature)
                                : trace.stat->stream_feature;
  }
  if (combined.cols() != vars.head1.weight.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "regression head expects " +
                                               std::to_string(vars.head1.weight.rows()) +
                                               " inputs, got " + std::to_string(combined.cols()));
  }

  ad::Var hidden = ad::relu(linear(combined, vars.head1));
  hidden = ad::dropout(hidden, config.dropout_rate, mode, dropout_rng);
  trace.score = ad::sigmoid(linear(hidden, vars.head2));
  return trace;
}

Prediction predict(const ModelParams& params, StreamInputs inputs, const ModelConfig& config) {
  ad::Graph graph;
  const ModelVars vars = bind_params(graph, params, false);
  Rng unused(0);
  const ForwardTrace trace = forward(vars, inputs, config, ad::Mode::kEval, unused);
  Prediction p;
  p.score = trace.score.value().item();
  if (trace.dynamic) p.dynamic = to_output(*trace.dynamic);
  if (trace.stat) p.stat = to_output(*trace.stat);
  return p;
}

ParamCount count_params(const ModelParams& params) {
  ParamCount out;
  for_each_param(params, [&](const std::string& name, const Tensor& t, ParamGroup group) {
    out.entries.push_back({name, t.rows(), t.cols(), t.size(), group});
    (group == ParamGroup::kAttention ? out.attention : out.prediction) += t.size();
    out.total += t.size();
  });
  return out;
}

}  // namespace actionnet
