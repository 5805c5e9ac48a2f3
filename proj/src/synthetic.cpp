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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "actionnet/data_io.hpp"
#include "actionnet/error.hpp"

namespace actionnet {

namespace {

double to_float_precision(double v) { return static_cast<double>(static_cast<float>(v)); }

Tensor unit_direction(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor u(1, dim);
  double norm = 0.0;
  for (auto& v : u.values()) {
    v = normal(rng);
    norm += v * v;
  }
  u *= 1.0 / std::sqrt(norm);
  return u;
}

// n x dim standard-normal noise with `m * direction` added to the key rows.
Tensor planted_features(std::size_t n, const Tensor& direction, double magnitude,
                        const std::vector<std::size_t>& keys, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor x(n, direction.cols());
  for (auto& v : x.values()) v = normal(rng);
  for (std::size_t k : keys) {
    auto row = x.row(k);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += magnitude * direction[c];
  }
  for (auto& v : x.values()) v = to_float_precision(v);
  return x;
}

std::vector<std::size_t> choose_keys(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
    std::swap(all[i], all[j]);
  }
  std::vector<std::size_t> keys(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(keys.begin(), keys.end());
  return keys;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void SyntheticSpec::validate() const {
  if (n_videos == 0) throw Error(ErrorCode::kInvalidArgument, "synthetic dataset needs at least one video");
  if (n_test > n_videos) throw Error(ErrorCode::kInvalidArgument, "n_test exceeds n_videos");
  if (n_dynamic == 0 || n_static == 0) {
    throw Error(ErrorCode::kInvalidArgument, "instance counts must be positive");
  }
  if (key_count > std::min(n_dynamic, n_static)) {
    throw Error(ErrorCode::kInvalidArgument, "key_count " + std::to_string(key_count) +
                                                 " exceeds the instance count of a stream");
  }
  if (!(noise_sigma >= 0.0) || !(max_magnitude > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0 and max_magnitude > 0");
  }
}

SyntheticDataset make_synthetic_dataset(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  SyntheticDataset data;
  data.spec = spec;
  data.direction_dynamic = unit_direction(kDynamicInputDim, rng);
  data.direction_static = unit_direction(kStaticInputDim, rng);

  std::uniform_real_distribution<double> magnitude(-spec.max_magnitude, spec.max_magnitude);
  std::normal_distribution<double> score_noise(0.0, 1.0);
  for (std::size_t v = 0; v < spec.n_videos; ++v) {
    SyntheticVideo video;
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%03zu", v);
    video.video_id = id;
    video.split = v + spec.n_test >= spec.n_videos ? Split::kTest : Split::kTrain;
    video.magnitude_dynamic = magnitude(rng);
    video.magnitude_static = magnitude(rng);
    video.key_dynamic = choose_keys(spec.n_dynamic, spec.key_count, rng);
    video.key_static = choose_keys(spec.n_static, spec.key_count, rng);
    video.dynamic = planted_features(spec.n_dynamic, data.direction_dynamic,
                                     video.magnitude_dynamic, video.key_dynamic, rng);
    video.stat = planted_features(spec.n_static, data.direction_static, video.magnitude_static,
                                  video.key_static, rng);
    video.latent = spec.weight_dynamic * video.magnitude_dynamic +
                   spec.weight_static * video.magnitude_static;
    const double noise = score_noise(rng) * spec.noise_sigma;
    video.score = std::clamp(sigmoid(video.latent) + noise, 0.0, 1.0);
    data.videos.push_back(std::move(video));
  }
  return data;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const SyntheticDataset& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "features", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + (dir / "features").string() + "': " + ec.message());

  std::vector<VideoRecord> records;
  std::ofstream keys(dir / "keys.csv", std::ios::trunc);
  if (!keys) throw Error(ErrorCode::kIo, "cannot write '" + (dir / "keys.csv").string() + "'");
  keys << "video_id,stream,instance_index\n";
  for (const auto& v : data.videos) {
    VideoRecord r;
    r.video_id = v.video_id;
    r.dynamic_path = std::filesystem::path("features") / (v.video_id + ".dyn.aqf");
    r.static_path = std::filesystem::path("features") / (v.video_id + ".stat.aqf");
    write_feature_file(dir / r.dynamic_path, v.dynamic);
    write_feature_file(dir / r.static_path, v.stat);
    r.difficulty = 10.0 * sigmoid(data.spec.weight_dynamic * v.magnitude_dynamic);
    r.execution = 10.0 * sigmoid(data.spec.weight_static * v.magnitude_static);
    r.total = 20.0 * v.score;
    r.split = v.split;
    records.push_back(std::move(r));
    for (std::size_t k : v.key_dynamic) keys << v.video_id << ",dynamic," << k << '\n';
    for (std::size_t k : v.key_static) keys << v.video_id << ",static," << k << '\n';
  }
  const auto manifest = dir / "manifest.csv";
  write_manifest(manifest, records);
  return manifest;
}

KeyIndexMap read_key_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  KeyIndexMap out;
  std::string line;
  std::getline(in, line);  // header
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, stream, index;
    if (!std::getline(ss, id, ',') || !std::getline(ss, stream, ',') || !std::getline(ss, index)) {
      throw Error(ErrorCode::kParseError, "'" + path.string() + "' row " + std::to_string(line_no));
    }
    try {
      out[{id, stream}].push_back(static_cast<std::size_t>(std::stoul(index)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError,
                  "'" + path.string() + "' row " + std::to_string(line_no) + ": bad index '" + index + "'");
    }
  }
  return out;
}

}  // namespace actionnet
