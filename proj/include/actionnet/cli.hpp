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

// Command-line front end: train, eval, export-attention, synth, inspect.
//
// Settings come from a line-oriented "key = value" file (--config) with
// '#' comments, overlaid by command-line flags. A dataset preset fills the
// training regime defaults before either is applied.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "actionnet/data_io.hpp"
#include "actionnet/model.hpp"
#include "actionnet/trainer.hpp"

namespace actionnet::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,    // bad flags, bad config, missing inputs
  kExitData = 3,     // malformed or incompatible data/checkpoints
  kExitNumeric = 4,  // undefined correlation, divergence
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Settings = std::map<std::string, std::string>;

struct RunConfig {
  std::string preset = "custom";
  std::filesystem::path manifest;
  std::filesystem::path out_dir = "out";
  std::filesystem::path checkpoint;
  std::uint64_t seed = 0;
  ModelConfig model;
  Schedule schedule;
  AugmentPolicy augment;
  OptimizerConfig optimizer;
  std::string eval_split = "test";
  std::vector<std::string> videos;  // export-attention; empty = all
  SyntheticSpec synth;
};

// Keys accepted in config files (flags use the same names with '-').
const std::vector<std::string>& known_keys();

Settings parse_config_file(const std::filesystem::path& path);
Settings parse_config_text(const std::string& text, const std::string& source);

// Fills batch size, epochs, decay epochs and windows for a named preset:
// mit, rg-ball, rg-clubs, rg-hoop, rg-ribbon, synthetic, custom.
void apply_preset(RunConfig& config, const std::string& preset);

// Defaults, then the preset named in `settings`, then every other key.
RunConfig resolve(const Settings& settings);

// Every resolved key in "key = value" form; feeding it back through
// --config reproduces the run.
std::string snapshot(const RunConfig& config);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace actionnet::cli
