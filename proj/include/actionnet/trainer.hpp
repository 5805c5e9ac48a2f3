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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "actionnet/autodiff.hpp"
#include "actionnet/data_io.hpp"
#include "actionnet/model.hpp"

namespace actionnet {

// --- loss --------------------------------------------------------------------

double mse_loss(double pred, double target);
ad::Var mse(ad::Var pred, double target);

// --- optimizer ---------------------------------------------------------------

struct OptimizerConfig {
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double lr_attention = 0.01;   // both context-attention branches
  double lr_prediction = 0.05;  // regression head

  double lr(ParamGroup g) const { return g == ParamGroup::kAttention ? lr_attention : lr_prediction; }
};

struct OptimizerState {
  OptimizerState(const ModelParams& params, OptimizerConfig hyper)
      : hyper(hyper), velocity(zeros_like(params)) {}

  OptimizerConfig hyper;
  ModelParams velocity;
};

// g' = g + wd * theta; v = mu * v + g'; theta -= lr_group * lr_scale * v.
void sgd_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr_scale);

// --- schedule ----------------------------------------------------------------

struct Schedule {
  int total_epochs = 1;
  std::vector<int> decay_epochs;  // strictly increasing, each < total_epochs
  double decay_rate = 0.1;
  std::size_t batch_size = 32;

  void validate() const;
};

// decay_rate ^ (number of decay epochs <= epoch)
double lr_at(const Schedule& schedule, int epoch);

// --- data --------------------------------------------------------------------

struct Sample {
  std::string video_id;
  Tensor dynamic;  // empty when the stream is unused
  Tensor stat;
  double target = 0.0;  // normalized training target
  double actual = 0.0;  // raw total score
};

struct TrainData {
  std::vector<Sample> train;
  std::vector<Sample> test;
  ScoreNormalizer normalizer;
};

// Reads the feature files the configuration needs and fits the target
// normalizer on the training split.
TrainData load_train_data(std::span<const VideoRecord> records, const ModelConfig& config);
// Same targets as writing the dataset to disk and loading the manifest.
TrainData train_data_from_synthetic(const SyntheticDataset& data, const ModelConfig& config);

// --- training ----------------------------------------------------------------

struct SampleGradient {
  double loss = 0.0;
  double score = 0.0;
  ModelParams grads;
};

SampleGradient sample_gradient(const ModelParams& params, StreamInputs inputs, double target,
                               const ModelConfig& config, ad::Mode mode, Rng& dropout_rng);

// Eval-mode scores using start-mode windows.
std::vector<double> predict_scores(const ModelParams& params, std::span<const Sample> samples,
                                   const ModelConfig& config, const AugmentPolicy& policy);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_rho = 0.0;  // NaN when undefined
  double test_rho = 0.0;   // NaN when undefined or no test split
  double lr_attention = 0.0;
  double lr_prediction = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_seconds = 0.0;
  std::filesystem::path checkpoint_path;
};

struct TrainOptions {
  ModelConfig model;
  Schedule schedule;
  AugmentPolicy augment;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  // Skip the per-epoch Spearman evaluation (reported as NaN).
  bool evaluate = true;
};

// One epoch = one pass over every training video, each drawn once with a
// fresh window, in a seeded shuffled order. The last short batch is kept.
class Trainer {
 public:
  Trainer(const TrainData& data, TrainOptions options);
  Trainer(const TrainData& data, TrainOptions options, ModelParams initial);

  EpochStats run_epoch();
  bool done() const { return epoch_ >= options_.schedule.total_epochs; }
  int epoch() const { return epoch_; }
  const ModelParams& params() const { return params_; }
  const TrainOptions& options() const { return options_; }

 private:
  const TrainData& data_;
  TrainOptions options_;
  ModelParams params_;
  OptimizerState optimizer_;
  ModelParams batch_grads_;
  int epoch_ = 0;
};

struct TrainResult {
  TrainReport report;
  ModelParams params;
};

// Runs every epoch; writes an ANPW checkpoint when `checkpoint` is set.
TrainResult train(const TrainData& data, const TrainOptions& options,
                  const std::filesystem::path& checkpoint = {});

// epoch,loss,train_rho,test_rho,lr_attention,lr_prediction
void write_report_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace actionnet
