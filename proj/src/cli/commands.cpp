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

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "actionnet/cli.hpp"
#include "actionnet/error.hpp"
#include "actionnet/metrics.hpp"

namespace actionnet::cli {

namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  return f;
}

std::vector<VideoRecord> load_manifest(const RunConfig& c) {
  if (c.manifest.empty()) throw UsageError("--manifest is required");
  if (!fs::is_regular_file(c.manifest)) {
    throw UsageError("manifest not found: '" + c.manifest.string() + "'");
  }
  return read_manifest(c.manifest);
}

ModelParams load_checkpoint(const RunConfig& c) {
  if (c.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (!fs::is_regular_file(c.checkpoint)) {
    throw UsageError("checkpoint not found: '" + c.checkpoint.string() + "'");
  }
  return load_params(c.checkpoint, c.model);
}

std::string rho_text(double rho) { return std::isnan(rho) ? "undefined" : fixed(rho); }

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto records = load_manifest(c);
  const TrainData data = load_train_data(records, c.model);
  if (data.train.empty()) throw UsageError("manifest has no training videos");

  ensure_dir(c.out_dir);
  open_out(c.out_dir / "resolved_config.txt") << snapshot(c);

  TrainOptions options{c.model, c.schedule, c.augment, c.optimizer, c.seed};
  std::optional<Trainer> trainer;
  if (c.checkpoint.empty()) {
    trainer.emplace(data, options);
  } else {
    trainer.emplace(data, options, load_checkpoint(c));
  }
  out << "training " << to_string(c.model.streams) << "/" << to_string(c.model.attention) << " on "
      << data.train.size() << " train / " << data.test.size() << " test videos, "
      << c.schedule.total_epochs << " epochs\n";

  TrainReport report;
  const auto start = std::chrono::steady_clock::now();
  while (!trainer->done()) {
    const EpochStats e = trainer->run_epoch();
    report.epochs.push_back(e);
    out << "epoch " << e.epoch << " loss " << fixed(e.loss, 6) << " train_rho " << rho_text(e.train_rho)
        << " test_rho " << rho_text(e.test_rho) << std::endl;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.checkpoint_path = c.out_dir / "checkpoint.anpw";
  save_params(report.checkpoint_path, trainer->params());
  write_report_csv(c.out_dir / "report.csv", report);

  const double final_rho = report.epochs.back().test_rho;
  out << "final test rho: " << rho_text(final_rho) << '\n'
      << "checkpoint: " << report.checkpoint_path.string() << '\n'
      << "wall time: " << fixed(report.wall_seconds, 1) << " s\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const auto records = load_manifest(c);
  const ModelParams params = load_checkpoint(c);
  const TrainData data = load_train_data(records, c.model);
  const auto& samples = c.eval_split == "train" ? data.train : data.test;
  if (samples.empty()) throw UsageError("split '" + c.eval_split + "' has no videos");

  const std::vector<double> scores = predict_scores(params, samples, c.model, c.augment);
  std::vector<double> actual;
  for (const auto& s : samples) actual.push_back(s.actual);

  ensure_dir(c.out_dir);
  auto csv = open_out(c.out_dir / "predictions.csv");
  csv << "video_id,predicted_score,predicted_total,actual_total\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    csv << samples[i].video_id << ',' << format_real(scores[i]) << ','
        << format_real(data.normalizer.inverse(scores[i])) << ',' << format_real(actual[i]) << '\n';
  }
  const double rho = spearman(scores, actual);
  out << "spearman rho (" << c.eval_split << ", " << samples.size() << " videos): " << fixed(rho) << '\n';
  return kExitOk;
}

struct KeyStats {
  double key_sum = 0.0;
  std::size_t key_n = 0;
  double other_sum = 0.0;
  std::size_t other_n = 0;
};

int cmd_export(const RunConfig& c, std::ostream& out) {
  const auto records = load_manifest(c);
  const ModelParams params = load_checkpoint(c);

  std::vector<const VideoRecord*> selected;
  if (c.videos.empty()) {
    for (const auto& r : records) selected.push_back(&r);
  } else {
    for (const auto& id : c.videos) {
      auto it = std::find_if(records.begin(), records.end(), [&](const VideoRecord& r) { return r.video_id == id; });
      if (it == records.end()) throw Error(ErrorCode::kUnknownVideo, "'" + id + "' is not in the manifest");
      selected.push_back(&*it);
    }
  }

  const fs::path key_path = c.manifest.parent_path() / "keys.csv";
  std::optional<KeyIndexMap> keys;
  if (fs::is_regular_file(key_path)) keys = read_key_sidecar(key_path);
  KeyStats key_stats;

  ensure_dir(c.out_dir);
  auto csv = open_out(c.out_dir / "attention.csv");
  csv << "video_id,stream,instance_index,weight\n";
  Rng unused(0);
  for (const VideoRecord* r : selected) {
    Tensor dyn, stat;
    if (c.model.uses_dynamic()) {
      dyn = augment_window(read_feature_file(r->dynamic_path, StreamKind::kDynamic), c.augment.window_dynamic,
                           AugmentMode::kStart, unused);
    }
    if (c.model.uses_static()) {
      stat = augment_window(read_feature_file(r->static_path, StreamKind::kStatic), c.augment.window_static,
                            AugmentMode::kStart, unused);
    }
    const Prediction p = predict(params, {dyn.empty() ? nullptr : &dyn, stat.empty() ? nullptr : &stat}, c.model);
    const std::pair<const char*, const AttentionOutput*> streams[] = {
        {"dynamic", p.dynamic ? &*p.dynamic : nullptr}, {"static", p.stat ? &*p.stat : nullptr}};
    for (const auto& [stream, o] : streams) {
      if (o == nullptr) continue;
      std::set<std::size_t> key_set;
      if (keys) {
        auto it = keys->find({r->video_id, stream});
        if (it != keys->end()) key_set.insert(it->second.begin(), it->second.end());
      }
      for (std::size_t i = 0; i < o->weights.rows(); ++i) {
        const double w = o->weights[i];
        csv << r->video_id << ',' << stream << ',' << i << ',' << format_real(w) << '\n';
        if (keys) {
          if (key_set.contains(i)) {
            key_stats.key_sum += w;
            ++key_stats.key_n;
          } else {
            key_stats.other_sum += w;
            ++key_stats.other_n;
          }
        }
      }
    }
  }
  out << "exported attention for " << selected.size() << " video(s) to "
      << (c.out_dir / "attention.csv").string() << '\n';
  if (keys && key_stats.key_n > 0 && key_stats.other_n > 0) {
    const double key_mean = key_stats.key_sum / static_cast<double>(key_stats.key_n);
    const double other_mean = key_stats.other_sum / static_cast<double>(key_stats.other_n);
    out << "key instances: mean weight " << fixed(key_mean, 5) << " vs " << fixed(other_mean, 5)
        << " for the rest (ratio " << fixed(key_mean / other_mean, 2) << ")\n";
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  Rng rng = derive_stream(c.seed, "synthetic");
  SyntheticDataset data;
  try {
    data = make_synthetic_dataset(c.synth, rng);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) throw UsageError(e.what());
    throw;
  }
  const fs::path manifest = write_synthetic_dataset(c.out_dir, data);
  out << "wrote " << data.videos.size() << " videos (" << c.synth.n_test << " test) to " << manifest.string()
      << '\n';
  return kExitOk;
}

int cmd_inspect(const RunConfig& c, std::ostream& out) {
  const ModelParams params = c.checkpoint.empty() ? param_layout(c.model) : load_checkpoint(c);
  const ParamCount count = count_params(params);
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %12s %10s  %s\n", "tensor", "shape", "params", "group");
  out << line;
  for (const auto& e : count.entries) {
    const std::string shape = std::to_string(e.rows) + "x" + std::to_string(e.cols);
    std::snprintf(line, sizeof(line), "%-28s %12s %10zu  %s\n", e.name.c_str(), shape.c_str(), e.count,
                  std::string(to_string(e.group)).c_str());
    out << line;
  }
  const double diff = (static_cast<double>(count.total) - kReferenceParamCount) / kReferenceParamCount;
  out << "attention group: " << count.attention << '\n'
      << "prediction group: " << count.prediction << '\n'
      << "total: " << count.total << '\n'
      << "reference: 3.54M (" << (diff >= 0 ? "+" : "") << fixed(100.0 * diff, 2) << "%)\n";
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return kExitUsage;
    case ErrorCode::kUndefinedCorrelation:
    case ErrorCode::kDiverged: return kExitNumeric;
    default: return kExitData;
  }
}

struct FlagSpec {
  const char* key;
  const char* help;
};

const FlagSpec kFlags[] = {
    {"preset", "mit | rg-ball | rg-clubs | rg-hoop | rg-ribbon | synthetic | custom"},
    {"manifest", "dataset manifest CSV"},
    {"out_dir", "output directory"},
    {"checkpoint", "ANPW checkpoint (eval, export-attention, inspect; warm start for train)"},
    {"seed", "master seed"},
    {"streams", "ds | ss | ts"},
    {"attention", "caa | sau | avg"},
    {"kernel_scale", "adjacency kernel scale K"},
    {"dropout", "head dropout rate"},
    {"adjacency_gradient", "back-propagate through the adjacency (true|false)"},
    {"weight_normalization", "softmax | sigmoid"},
    {"epochs", "number of epochs"},
    {"batch_size", "videos per update"},
    {"decay_epochs", "comma-separated epochs where the learning rate decays"},
    {"decay_rate", "learning-rate decay factor"},
    {"window_dynamic", "dynamic window length (0 = all instances)"},
    {"window_static", "static window length (0 = all instances)"},
    {"augment", "random | center | start"},
    {"lr_attention", "learning rate of the attention branches"},
    {"lr_prediction", "learning rate of the regression head"},
    {"momentum", "SGD momentum"},
    {"weight_decay", "L2 weight decay"},
    {"split", "eval split: train | test"},
    {"videos", "comma-separated video ids"},
    {"n_videos", "synthetic: number of videos"},
    {"n_test", "synthetic: videos in the test split"},
    {"n_dynamic", "synthetic: dynamic instances per video"},
    {"n_static", "synthetic: static instances per video"},
    {"key_count", "synthetic: key instances per stream"},
    {"noise_sigma", "synthetic: score noise std-dev"},
    {"max_magnitude", "synthetic: largest planted magnitude"},
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Action quality assessment with context-aware attention"};
  app.name("actionnet");
  app.require_subcommand(1, 1);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
    CLI::App* app = nullptr;
  };
  std::vector<Command> commands = {
      {"train", "train a model and write report.csv, checkpoint.anpw, resolved_config.txt", cmd_train},
      {"eval", "score a split and report Spearman's rho", cmd_eval},
      {"export-attention", "write per-instance attention weights", cmd_export},
      {"synth", "generate a synthetic dataset", cmd_synth},
      {"inspect", "print the parameter breakdown", cmd_inspect},
  };

  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<CLI::Option*>> options;
  for (auto& cmd : commands) {
    cmd.app = app.add_subcommand(cmd.name, cmd.help);
    cmd.app->add_option("--config", config_path, "key = value settings file");
    for (const auto& f : kFlags) options[f.key].push_back(cmd.app->add_option(flag_name(f.key), values[f.key], f.help));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Settings settings;
    if (!config_path.empty()) settings = parse_config_file(config_path);
    for (const auto& [key, opts] : options) {
      for (const CLI::Option* o : opts) {
        if (o->count() > 0) settings[key] = values[key];
      }
    }
    const RunConfig config = resolve(settings);
    for (const auto& cmd : commands) {
      if (cmd.app->parsed()) return cmd.fn(config, out);
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace actionnet::cli
