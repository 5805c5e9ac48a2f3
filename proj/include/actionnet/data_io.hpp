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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actionnet/context_attention.hpp"
#include "actionnet/random.hpp"
#include "actionnet/tensor.hpp"

namespace actionnet {

// --- AQF1 feature files ------------------------------------------------------
//
// "AQF1" | u32 N | u32 D | N*D f32 values, row-major, little-endian.
// No trailing bytes. Values are widened to double on read.

void write_feature_file(const std::filesystem::path& path, const Tensor& features);

// Validates D in {1024, 2048} and, when given, against the stream kind.
Tensor read_feature_file(const std::filesystem::path& path,
                         std::optional<StreamKind> expected = std::nullopt);

// --- manifest ----------------------------------------------------------------

enum class Split { kTrain, kTest };
std::string_view to_string(Split s);

struct VideoRecord {
  std::string video_id;
  std::filesystem::path dynamic_path;
  std::filesystem::path static_path;
  double difficulty = 0.0;
  double execution = 0.0;
  // Roughly difficulty + execution - penalties for gymnastics; not checked.
  double total = 0.0;
  Split split = Split::kTrain;
};

inline constexpr std::string_view kManifestHeader =
    "video_id,dynamic_path,static_path,score_difficulty,score_execution,score_total,split";

// Relative feature paths are resolved against the manifest's directory.
std::vector<VideoRecord> read_manifest(const std::filesystem::path& path);
// Paths are written as given.
void write_manifest(const std::filesystem::path& path, std::span<const VideoRecord> records);

// Shortest representation that parses back to the same double.
std::string format_real(double v);

// --- target normalization ----------------------------------------------------

// Min-max scaling fitted on the training split. Test scores may map
// outside [0, 1].
class ScoreNormalizer {
 public:
  ScoreNormalizer() = default;
  ScoreNormalizer(double min, double max);
  static ScoreNormalizer fit(std::span<const double> train_scores);

  double normalize(double x) const { return (x - min_) / (max_ - min_); }
  double inverse(double y) const { return min_ + y * (max_ - min_); }
  double min() const { return min_; }
  double max() const { return max_; }

 private:
  double min_ = 0.0;
  double max_ = 1.0;
};

// --- temporal window augmentation -------------------------------------------

enum class AugmentMode { kRandomShift, kCenter, kStart };

struct AugmentPolicy {
  // 0 keeps every instance.
  std::size_t window_dynamic = 26;
  std::size_t window_static = 80;
  AugmentMode mode = AugmentMode::kRandomShift;

  std::size_t window(StreamKind kind) const {
    return kind == StreamKind::kDynamic ? window_dynamic : window_static;
  }
};

// Contiguous rows [o, o + window). Random-shift draws o uniformly from
// [0, N - window]; center uses (N - window) / 2; start uses 0. Inputs with
// fewer rows than the window are padded by repeating the last row.
Tensor augment_window(const Tensor& features, std::size_t window, AugmentMode mode, Rng& rng);

// --- synthetic planted-signal data ------------------------------------------

struct SyntheticSpec {
  std::size_t n_videos = 40;
  std::size_t n_test = 10;  // last n_test videos form the test split
  std::size_t n_dynamic = 26;
  std::size_t n_static = 80;
  std::size_t key_count = 6;
  double noise_sigma = 0.0;  // std-dev of additive score noise
  double max_magnitude = 96.0;      // m ~ U(-max, max)
  double weight_dynamic = 0.03125;  // a in sigmoid(a m_dyn + b m_stat)
  double weight_static = 0.03125;   // b

  void validate() const;
};

struct SyntheticVideo {
  std::string video_id;
  Tensor dynamic;  // n_dynamic x 1024
  Tensor stat;     // n_static x 2048
  double magnitude_dynamic = 0.0;
  double magnitude_static = 0.0;
  // a m_dyn + b m_stat; the score is a noisy monotone function of it.
  double latent = 0.0;
  double score = 0.0;  // in [0, 1]
  std::vector<std::size_t> key_dynamic;
  std::vector<std::size_t> key_static;
  Split split = Split::kTrain;
};

struct SyntheticDataset {
  SyntheticSpec spec;
  Tensor direction_dynamic;  // 1 x 1024 unit vector
  Tensor direction_static;   // 1 x 2048 unit vector
  std::vector<SyntheticVideo> videos;
};

// Features are N(0, 1) noise (rounded to float precision so they survive
// AQF1 unchanged); the key instances of each stream additionally carry
// m * u for the stream's planted direction u and per-video magnitude m.
// score = clip01(sigmoid(a m_dyn + b m_stat) + noise).
SyntheticDataset make_synthetic_dataset(const SyntheticSpec& spec, Rng& rng);

// Writes features/<id>.dyn.aqf, features/<id>.stat.aqf, manifest.csv and
// keys.csv (video_id,stream,instance_index) under `dir`. Scores are
// written as total = 20 * score. Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const SyntheticDataset& data);

// keys.csv -> (video_id, stream) -> key instance indices.
using KeyIndexMap = std::map<std::pair<std::string, std::string>, std::vector<std::size_t>>;
KeyIndexMap read_key_sidecar(const std::filesystem::path& path);

}  // namespace actionnet
