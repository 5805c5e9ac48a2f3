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

#include "actionnet/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "actionnet/error.hpp"
#include "binary_io.hpp"

namespace actionnet {

namespace {

constexpr std::string_view kFeatureMagic = "AQF1";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

// --- AQF1 -------------------------------------------------------------------

void write_feature_file(const std::filesystem::path& path, const Tensor& features) {
  if (features.rows() > std::numeric_limits<std::uint32_t>::max() ||
      features.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "feature matrix too large for AQF1");
  }
  detail::ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (double v : features.values()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kNonFinite, "feature value " + format_real(v) + " is not a finite float");
    }
    w.f32(f);
  }
  w.write_to(path);
}

Tensor read_feature_file(const std::filesystem::path& path, std::optional<StreamKind> expected) {
  auto r = detail::ByteReader::from_file(path);
  if (r.bytes(kFeatureMagic.size()) != kFeatureMagic) {
    throw Error(ErrorCode::kBadMagic, "'" + path.string() + "' is not an AQF1 feature file");
  }
  const std::uint64_t n = r.u32();
  const std::uint64_t d = r.u32();
  if (n == 0) throw Error(ErrorCode::kEmptyInstanceSet, "'" + path.string() + "' holds no instances");
  if (d != kDynamicInputDim && d != kStaticInputDim) {
    throw Error(ErrorCode::kBadDimension,
                "'" + path.string() + "' has " + std::to_string(d) + "-d features, expected 1024 or 2048");
  }
  if (expected && d != input_dim(*expected)) {
    throw Error(ErrorCode::kBadDimension, "'" + path.string() + "' has " + std::to_string(d) +
                                              "-d features but the " +
                                              std::string(to_string(*expected)) + " stream needs " +
                                              std::to_string(input_dim(*expected)));
  }
  r.need(n * d * 4);
  Tensor out(n, d);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float v = r.f32();
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "'" + path.string() + "' value " + std::to_string(i) +
                                             " is not finite");
    }
    out[i] = v;
  }
  r.expect_end();
  return out;
}

// --- manifest ----------------------------------------------------------------

std::string_view to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<VideoRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMissingColumn, "manifest '" + path.string() + "' has no header");
  }
  line = strip_cr(line);
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (line != kManifestHeader) {
    const auto have = split_fields(line);
    for (const auto& col : split_fields(std::string(kManifestHeader))) {
      if (std::find(have.begin(), have.end(), col) == have.end()) {
        throw Error(ErrorCode::kMissingColumn, "manifest '" + path.string() + "' lacks column '" + col + "'");
      }
    }
    throw Error(ErrorCode::kMissingColumn,
                "manifest header must be exactly '" + std::string(kManifestHeader) + "'");
  }

  const std::filesystem::path base = path.parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  std::vector<VideoRecord> records;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = "manifest '" + path.string() + "' row " + std::to_string(line_no);
    if (line.find('"') != std::string::npos) {
      throw Error(ErrorCode::kParseError, where + ": quoted fields are not supported");
    }
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw Error(ErrorCode::kParseError,
                  where + ": expected 7 fields, found " + std::to_string(f.size()));
    }
    auto real = [&](const std::string& s, const char* column) {
      double v = 0.0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kParseError,
                    where + ": cannot parse " + column + " value '" + s + "' as a real");
      }
      return v;
    };

    VideoRecord rec;
    rec.video_id = f[0];
    if (rec.video_id.empty()) throw Error(ErrorCode::kParseError, where + ": empty video_id");
    rec.dynamic_path = resolve(f[1]);
    rec.static_path = resolve(f[2]);
    rec.difficulty = real(f[3], "score_difficulty");
    rec.execution = real(f[4], "score_execution");
    rec.total = real(f[5], "score_total");
    if (f[6] == "train") {
      rec.split = Split::kTrain;
    } else if (f[6] == "test") {
      rec.split = Split::kTest;
    } else {
      throw Error(ErrorCode::kParseError, where + ": split must be train or test, got '" + f[6] + "'");
    }
    if (!seen.insert(rec.video_id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": video_id '" + rec.video_id + "' appears twice");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, std::span<const VideoRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    for (const auto& field : {r.video_id, r.dynamic_path.string(), r.static_path.string()}) {
      if (field.find(',') != std::string::npos || field.find('"') != std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument, "manifest field '" + field + "' contains ',' or '\"'");
      }
    }
    out << r.video_id << ',' << r.dynamic_path.string() << ',' << r.static_path.string() << ','
        << format_real(r.difficulty) << ',' << format_real(r.execution) << ','
        << format_real(r.total) << ',' << to_string(r.split) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

// --- normalization -----------------------------------------------------------

ScoreNormalizer::ScoreNormalizer(double min, double max) : min_(min), max_(max) {
  if (!(max > min)) {
    throw Error(ErrorCode::kInvalidArgument,
                "score range is degenerate: min " + format_real(min) + ", max " + format_real(max));
  }
}

ScoreNormalizer ScoreNormalizer::fit(std::span<const double> train_scores) {
  if (train_scores.empty()) throw Error(ErrorCode::kInvalidArgument, "no training scores to fit");
  const auto [lo, hi] = std::minmax_element(train_scores.begin(), train_scores.end());
  return ScoreNormalizer(*lo, *hi);
}

// --- windows -----------------------------------------------------------------

Tensor augment_window(const Tensor& features, std::size_t window, AugmentMode mode, Rng& rng) {
  const std::size_t n = features.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyInstanceSet, "cannot window an empty instance set");
  if (window == 0 || window == n) return features;
  if (n < window) {
    std::vector<std::size_t> idx(window, n - 1);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return features.gather_rows(idx);
  }
  std::size_t offset = 0;
  switch (mode) {
    case AugmentMode::kRandomShift:
      offset = std::uniform_int_distribution<std::size_t>(0, n - window)(rng);
      break;
    case AugmentMode::kCenter:
      offset = (n - window) / 2;
      break;
    case AugmentMode::kStart:
      break;
  }
  return features.slice_rows(offset, offset + window);
}

}  // namespace actionnet
