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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "actionnet/cli.hpp"
#include "actionnet/error.hpp"

namespace actionnet::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const char* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw UsageError("setting '" + key + "': cannot parse '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("setting '" + key + "': expected true or false, got '" + value + "'");
}

template <class E>
E parse_enum(const std::string& key, const std::string& value,
             std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, e] : options) {
    if (value == name) return e;
  }
  std::string allowed;
  for (const auto& [name, e] : options) allowed += (allowed.empty() ? "" : "|") + std::string(name);
  throw UsageError("setting '" + key + "': expected " + allowed + ", got '" + value + "'");
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string join_ints(const std::vector<int>& items) {
  std::string out;
  for (int v : items) out += (out.empty() ? "" : ",") + std::to_string(v);
  return out;
}

std::string_view augment_name(AugmentMode m) {
  switch (m) {
    case AugmentMode::kRandomShift: return "random";
    case AugmentMode::kCenter: return "center";
    case AugmentMode::kStart: return "start";
  }
  return "?";
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "preset", "manifest", "out_dir", "checkpoint", "seed",
      "streams", "attention", "kernel_scale", "dropout", "adjacency_gradient",
      "weight_normalization", "epochs", "batch_size", "decay_epochs", "decay_rate",
      "window_dynamic", "window_static", "augment", "lr_attention", "lr_prediction",
      "momentum", "weight_decay", "split", "videos", "n_videos",
      "n_test", "n_dynamic", "n_static", "key_count", "noise_sigma",
      "max_magnitude",
  };
  return keys;
}

Settings parse_config_text(const std::string& text, const std::string& source) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void apply_preset(RunConfig& c, const std::string& preset) {
  auto rg = [&c](int epochs) {
    c.schedule.batch_size = 32;
    c.schedule.total_epochs = epochs;
    c.schedule.decay_epochs = {epochs - 100, epochs - 50};
    c.augment.window_dynamic = 26;
    c.augment.window_static = 80;
  };
  if (preset == "mit") {
    c.schedule.batch_size = 16;
    c.schedule.total_epochs = 200;
    c.schedule.decay_epochs = {150, 180};
    c.augment.window_dynamic = 48;
    c.augment.window_static = 150;
  } else if (preset == "rg-ball") {
    rg(400);
  } else if (preset == "rg-clubs") {
    rg(300);
  } else if (preset == "rg-hoop") {
    rg(500);
  } else if (preset == "rg-ribbon") {
    rg(300);
  } else if (preset == "synthetic") {
    // RG windows on the desk-scale planted-signal data.
    c.schedule.batch_size = 8;
    c.schedule.total_epochs = 60;
    c.schedule.decay_epochs = {};
    c.augment.window_dynamic = 26;
    c.augment.window_static = 80;
  } else if (preset == "custom") {
    c.schedule.batch_size = 32;
    c.schedule.total_epochs = 100;
    c.schedule.decay_epochs = {};
    c.augment.window_dynamic = 0;
    c.augment.window_static = 0;
  } else {
    throw UsageError("unknown preset '" + preset +
                     "' (expected mit|rg-ball|rg-clubs|rg-hoop|rg-ribbon|synthetic|custom)");
  }
  c.preset = preset;
}

RunConfig resolve(const Settings& s) {
  RunConfig c;
  apply_preset(c, s.contains("preset") ? s.at("preset") : "custom");

  for (const auto& [key, value] : s) {
    if (key == "preset") continue;
    if (key == "manifest") c.manifest = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "checkpoint") c.checkpoint = value;
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "streams")
      c.model.streams = parse_enum<Streams>(key, value, {{"ds", Streams::kDynamic},
                                                         {"ss", Streams::kStatic},
                                                         {"ts", Streams::kTwoStream}});
    else if (key == "attention")
      c.model.attention = parse_enum<AttentionVariant>(
          key, value, {{"caa", AttentionVariant::kCaa}, {"sau", AttentionVariant::kSau},
                       {"avg", AttentionVariant::kAvg}});
    else if (key == "kernel_scale") c.model.kernel_scale = parse_number<double>(key, value);
    else if (key == "dropout") c.model.dropout_rate = parse_number<double>(key, value);
    else if (key == "adjacency_gradient") c.model.adjacency_gradient = parse_bool(key, value);
    else if (key == "weight_normalization")
      c.model.weight_normalization = parse_enum<WeightNormalization>(
          key, value, {{"softmax", WeightNormalization::kSoftmax},
                       {"sigmoid", WeightNormalization::kSigmoid}});
    else if (key == "epochs") c.schedule.total_epochs = parse_number<int>(key, value);
    else if (key == "batch_size") c.schedule.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "decay_epochs") {
      c.schedule.decay_epochs.clear();
      for (const auto& item : split_list(value)) c.schedule.decay_epochs.push_back(parse_number<int>(key, item));
    } else if (key == "decay_rate") c.schedule.decay_rate = parse_number<double>(key, value);
    else if (key == "window_dynamic") c.augment.window_dynamic = parse_number<std::size_t>(key, value);
    else if (key == "window_static") c.augment.window_static = parse_number<std::size_t>(key, value);
    else if (key == "augment")
      c.augment.mode = parse_enum<AugmentMode>(key, value, {{"random", AugmentMode::kRandomShift},
                                                            {"center", AugmentMode::kCenter},
                                                            {"start", AugmentMode::kStart}});
    else if (key == "lr_attention") c.optimizer.lr_attention = parse_number<double>(key, value);
    else if (key == "lr_prediction") c.optimizer.lr_prediction = parse_number<double>(key, value);
    else if (key == "momentum") c.optimizer.momentum = parse_number<double>(key, value);
    else if (key == "weight_decay") c.optimizer.weight_decay = parse_number<double>(key, value);
    else if (key == "split") {
      if (value != "train" && value != "test") throw UsageError("setting 'split': expected train|test");
      c.eval_split = value;
    } else if (key == "videos") c.videos = split_list(value);
    else if (key == "n_videos") c.synth.n_videos = parse_number<std::size_t>(key, value);
    else if (key == "n_test") c.synth.n_test = parse_number<std::size_t>(key, value);
    else if (key == "n_dynamic") c.synth.n_dynamic = parse_number<std::size_t>(key, value);
    else if (key == "n_static") c.synth.n_static = parse_number<std::size_t>(key, value);
    else if (key == "key_count") c.synth.key_count = parse_number<std::size_t>(key, value);
    else if (key == "noise_sigma") c.synth.noise_sigma = parse_number<double>(key, value);
    else if (key == "max_magnitude") c.synth.max_magnitude = parse_number<double>(key, value);
    else throw UsageError("unknown setting '" + key + "'");
  }
  c.model.seed = c.seed;
  try {
    c.model.validate();
    c.schedule.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::string snapshot(const RunConfig& c) {
  std::ostringstream o;
  auto real = [](double v) { return format_real(v); };
  o << "# resolved configuration\n"
    << "preset = " << c.preset << '\n'
    << "manifest = " << c.manifest.string() << '\n'
    << "out_dir = " << c.out_dir.string() << '\n'
    << "checkpoint = " << c.checkpoint.string() << '\n'
    << "seed = " << c.seed << '\n'
    << "streams = " << to_string(c.model.streams) << '\n'
    << "attention = " << to_string(c.model.attention) << '\n'
    << "kernel_scale = " << real(c.model.kernel_scale) << '\n'
    << "dropout = " << real(c.model.dropout_rate) << '\n'
    << "adjacency_gradient = " << (c.model.adjacency_gradient ? "true" : "false") << '\n'
    << "weight_normalization = "
    << (c.model.weight_normalization == WeightNormalization::kSoftmax ? "softmax" : "sigmoid") << '\n'
    << "epochs = " << c.schedule.total_epochs << '\n'
    << "batch_size = " << c.schedule.batch_size << '\n'
    << "decay_epochs = " << join_ints(c.schedule.decay_epochs) << '\n'
    << "decay_rate = " << real(c.schedule.decay_rate) << '\n'
    << "window_dynamic = " << c.augment.window_dynamic << '\n'
    << "window_static = " << c.augment.window_static << '\n'
    << "augment = " << augment_name(c.augment.mode) << '\n'
    << "lr_attention = " << real(c.optimizer.lr_attention) << '\n'
    << "lr_prediction = " << real(c.optimizer.lr_prediction) << '\n'
    << "momentum = " << real(c.optimizer.momentum) << '\n'
    << "weight_decay = " << real(c.optimizer.weight_decay) << '\n'
    << "split = " << c.eval_split << '\n'
    << "videos = " << join(c.videos) << '\n'
    << "n_videos = " << c.synth.n_videos << '\n'
    << "n_test = " << c.synth.n_test << '\n'
    << "n_dynamic = " << c.synth.n_dynamic << '\n'
    << "n_static = " << c.synth.n_static << '\n'
    << "key_count = " << c.synth.key_count << '\n'
    << "noise_sigma = " << real(c.synth.noise_sigma) << '\n'
    << "max_magnitude = " << real(c.synth.max_magnitude) << '\n';
  return o.str();
}

}  // namespace actionnet::cli
