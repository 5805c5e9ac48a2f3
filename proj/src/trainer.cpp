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

#include "actionnet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "actionnet/error.hpp"
#include "actionnet/metrics.hpp"

namespace actionnet {

namespace {

std::vector<Tensor*> tensors_of(ModelParams& p) {
  std::vector<Tensor*> out;
  for_each_param(p, [&](const std::string&, Tensor& t, ParamGroup) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> tensors_of(const ModelParams& p) {
  std::vector<const Tensor*> out;
  for_each_param(p, [&](const std::string&, const Tensor& t, ParamGroup) { out.push_back(&t); });
  return out;
}

double correlation_or_nan(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  try {
    return spearman(predicted, actual);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUndefinedCorrelation) return std::numeric_limits<double>::quiet_NaN();
    throw;
  }
}

StreamInputs inputs_of(const Tensor& dynamic, const Tensor& stat) {
  return {dynamic.empty() ? nullptr : &dynamic, stat.empty() ? nullptr : &stat};
}

}  // namespace

double mse_loss(double pred, double target) { return (pred - target) * (pred - target); }

ad::Var mse(ad::Var pred, double target) {
  ad::Var diff = ad::sub(pred, pred.graph().constant(Tensor(1, 1, target)));
  return ad::mul(diff, diff);
}

void sgd_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr_scale) {
  std::vector<const Tensor*> g = tensors_of(grads);
  std::vector<Tensor*> v = tensors_of(state.velocity);
  std::size_t i = 0;
  if (g.size() != v.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient and optimizer state hold different tensor sets");
  }
  const OptimizerConfig& h = state.hyper;
  for_each_param(params, [&](const std::string& name, Tensor& theta, ParamGroup group) {
    if (i >= g.size() || !theta.same_shape(*g[i]) || !theta.same_shape(*v[i])) {
      throw Error(ErrorCode::kShapeMismatch, "gradient for '" + name + "' does not match the parameter");
    }
    const Tensor& grad = *g[i];
    Tensor& vel = *v[i];
    const double step = h.lr(group) * lr_scale;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = grad[k] + h.weight_decay * theta[k];
      vel[k] = h.momentum * vel[k] + gk;
      theta[k] -= step * vel[k];
    }
    ++i;
  });
  if (i != g.size()) throw Error(ErrorCode::kShapeMismatch, "gradient has extra tensors");
}

void Schedule::validate() const {
  if (total_epochs < 0) throw Error(ErrorCode::kInvalidArgument, "total_epochs must be >= 0");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (!(decay_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "decay_rate must be positive");
  for (std::size_t i = 0; i < decay_epochs.size(); ++i) {
    if (decay_epochs[i] < 0 || decay_epochs[i] >= total_epochs ||
        (i > 0 && decay_epochs[i] <= decay_epochs[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "decay epochs must be strictly increasing and below total_epochs");
    }
  }
}

double lr_at(const Schedule& schedule, int epoch) {
  if (epoch < 0 || epoch >= schedule.total_epochs) {
    throw Error(ErrorCode::kInvalidArgument, "epoch " + std::to_string(epoch) + " outside [0, " +
                                                 std::to_string(schedule.total_epochs) + ")");
  }
  double scale = 1.0;
  for (int d : schedule.decay_epochs) {
    if (d <= epoch) scale *= schedule.decay_rate;
  }
  return scale;
}

TrainData load_train_data(std::span<const VideoRecord> records, const ModelConfig& config) {
  TrainData data;
  std::vector<double> train_totals;
  for (const auto& r : records) {
    Sample s;
    s.video_id = r.video_id;
    if (config.uses_dynamic()) s.dynamic = read_feature_file(r.dynamic_path, StreamKind::kDynamic);
    if (config.uses_static()) s.stat = read_feature_file(r.static_path, StreamKind::kStatic);
    s.actual = r.total;
    if (r.split == Split::kTrain) train_totals.push_back(r.total);
    (r.split == Split::kTrain ? data.train : data.test).push_back(std::move(s));
  }
  if (!train_totals.empty()) {
    data.normalizer = ScoreNormalizer::fit(train_totals);
    for (auto* split : {&data.train, &data.test})
      for (auto& s : *split) s.target = data.normalizer.normalize(s.actual);
  }
  return data;
}

TrainData train_data_from_synthetic(const SyntheticDataset& synth, const ModelConfig& config) {
  TrainData data;
  std::vector<double> train_totals;
  for (const auto& v : synth.videos) {
    Sample s;
    s.video_id = v.video_id;
    if (config.uses_dynamic()) s.dynamic = v.dynamic;
    if (config.uses_static()) s.stat = v.stat;
    s.actual = 20.0 * v.score;
    if (v.split == Split::kTrain) train_totals.push_back(s.actual);
    (v.split == Split::kTrain ? data.train : data.test).push_back(std::move(s));
  }
  if (!train_totals.empty()) {
    data.normalizer = ScoreNormalizer::fit(train_totals);
    for (auto* split : {&data.train, &data.test})
      for (auto& s : *split) s.target = data.normalizer.normalize(s.actual);
  }
  return data;
}

SampleGradient sample_gradient(const ModelParams& params, StreamInputs inputs, double target,
                               const ModelConfig& config, ad::Mode mode, Rng& dropout_rng) {
  ad::Graph graph;
  const ModelVars vars = bind_params(graph, params, true);
  const ForwardTrace trace = forward(vars, inputs, config, mode, dropout_rng);
  ad::Var loss = mse(trace.score, target);
  graph.backward(loss);
  SampleGradient out;
  out.loss = loss.value().item();
  out.score = trace.score.value().item();
  out.grads = collect_gradients(graph, vars);
  return out;
}

std::vector<double> predict_scores(const ModelParams& params, std::span<const Sample> samples,
                                   const ModelConfig& config, const AugmentPolicy& policy) {
  std::vector<double> out;
  out.reserve(samples.size());
  Rng unused(0);
  for (const auto& s : samples) {
    Tensor dyn = s.dynamic.empty() ? Tensor()
                                   : augment_window(s.dynamic, policy.window_dynamic, AugmentMode::kStart, unused);
    Tensor stat = s.stat.empty() ? Tensor()
                                 : augment_window(s.stat, policy.window_static, AugmentMode::kStart, unused);
    out.push_back(predict(params, inputs_of(dyn, stat), config).score);
  }
  return out;
}

Trainer::Trainer(const TrainData& data, TrainOptions options)
    : Trainer(data, options, [&options] {
        Rng rng = derive_stream(options.seed, "init");
        return init_params(options.model, rng);
      }()) {}

Trainer::Trainer(const TrainData& data, TrainOptions options, ModelParams initial)
    : data_(data),
      options_(std::move(options)),
      params_(std::move(initial)),
      optimizer_(params_, options_.optimizer),
      batch_grads_(zeros_like(params_)) {
  options_.model.validate();
  options_.schedule.validate();
  if (data_.train.empty()) throw Error(ErrorCode::kInvalidArgument, "training split is empty");
}

EpochStats Trainer::run_epoch() {
  if (done()) throw Error(ErrorCode::kInvalidArgument, "training already finished");
  const int epoch = epoch_;
  const std::uint64_t seed = options_.seed;
  const double scale = lr_at(options_.schedule, epoch);
  const std::size_t n = data_.train.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = derive_stream(seed, "shuffle", {static_cast<std::uint64_t>(epoch)});
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  std::vector<Tensor*> acc = tensors_of(batch_grads_);
  double loss_sum = 0.0;
  for (std::size_t begin = 0; begin < n; begin += options_.schedule.batch_size) {
    const std::size_t end = std::min(n, begin + options_.schedule.batch_size);
    for (Tensor* t : acc) t->fill(0.0);
    for (std::size_t pos = begin; pos < end; ++pos) {
      const std::size_t index = order[pos];
      const Sample& s = data_.train[index];
      const std::initializer_list<std::uint64_t> key = {static_cast<std::uint64_t>(epoch), index};
      Rng window_rng = derive_stream(seed, "augment", key);
      Rng dropout_rng = derive_stream(seed, "dropout", key);
      const AugmentPolicy& p = options_.augment;
      Tensor dyn = s.dynamic.empty() ? Tensor() : augment_window(s.dynamic, p.window_dynamic, p.mode, window_rng);
      Tensor stat = s.stat.empty() ? Tensor() : augment_window(s.stat, p.window_static, p.mode, window_rng);

      SampleGradient g = sample_gradient(params_, inputs_of(dyn, stat), s.target, options_.model,
                                         ad::Mode::kTrain, dropout_rng);
      loss_sum += g.loss;
      std::vector<const Tensor*> gt = tensors_of(static_cast<const ModelParams&>(g.grads));
      for (std::size_t i = 0; i < acc.size(); ++i) *acc[i] += *gt[i];
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (Tensor* t : acc) *t *= inv;
    sgd_step(params_, batch_grads_, optimizer_, scale);
  }

  EpochStats stats;
  stats.epoch = epoch;
  stats.loss = loss_sum / static_cast<double>(n);
  if (!std::isfinite(stats.loss)) {
    throw Error(ErrorCode::kDiverged, "non-finite loss at epoch " + std::to_string(epoch));
  }
  stats.lr_attention = options_.optimizer.lr_attention * scale;
  stats.lr_prediction = options_.optimizer.lr_prediction * scale;
  stats.train_rho = stats.test_rho = std::numeric_limits<double>::quiet_NaN();
  if (options_.evaluate) {
    auto rho_of = [&](const std::vector<Sample>& split) {
      std::vector<double> actual;
      for (const auto& s : split) actual.push_back(s.actual);
      return correlation_or_nan(predict_scores(params_, split, options_.model, options_.augment), actual);
    };
    stats.train_rho = rho_of(data_.train);
    stats.test_rho = rho_of(data_.test);
  }
  ++epoch_;
  return stats;
}

TrainResult train(const TrainData& data, const TrainOptions& options,
                  const std::filesystem::path& checkpoint) {
  const auto start = std::chrono::steady_clock::now();
  Trainer trainer(data, options);
  TrainResult result;
  while (!trainer.done()) result.report.epochs.push_back(trainer.run_epoch());
  result.params = trainer.params();
  if (!checkpoint.empty()) {
    save_params(checkpoint, result.params);
    result.report.checkpoint_path = checkpoint;
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_report_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  auto real = [](double v) { return std::isnan(v) ? std::string("nan") : format_real(v); };
  out << "epoch,loss,train_rho,test_rho,lr_attention,lr_prediction\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << real(e.loss) << ',' << real(e.train_rho) << ',' << real(e.test_rho)
        << ',' << real(e.lr_attention) << ',' << real(e.lr_prediction) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace actionnet
