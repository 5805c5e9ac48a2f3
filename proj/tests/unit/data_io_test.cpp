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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "actionnet/data_io.hpp"
#include "actionnet/error.hpp"
#include "actionnet/metrics.hpp"

namespace actionnet {
namespace {

namespace fs = std::filesystem;
using namespace std::string_literals;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "actionnet_data_io_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Tensor float_exact(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 r(seed);
  std::normal_distribution<float> n(0.0f, 3.0f);
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = n(r);
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void dump(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

std::string error_text(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(FeatureFile, RoundTrip) {
  const fs::path dir = scratch("roundtrip");
  const Tensor t = float_exact(7, 1024, 1);
  write_feature_file(dir / "a.aqf", t);
  EXPECT_TRUE(bit_equal(read_feature_file(dir / "a.aqf"), t));
  EXPECT_TRUE(bit_equal(read_feature_file(dir / "a.aqf", StreamKind::kDynamic), t));
  EXPECT_EQ(fs::file_size(dir / "a.aqf"), 12u + 7u * 1024u * 4u);
}

TEST(FeatureFile, RoundTripExtremes) {
  const fs::path dir = scratch("extremes");
  Tensor t(1, 2048);
  t[0] = std::numeric_limits<float>::max();
  t[1] = -std::numeric_limits<float>::max();
  t[2] = std::numeric_limits<float>::denorm_min();
  t[3] = -0.0;
  write_feature_file(dir / "x.aqf", t);
  const Tensor back = read_feature_file(dir / "x.aqf");
  EXPECT_TRUE(bit_equal(back, t));
  EXPECT_TRUE(std::signbit(back[3]));
}

TEST(FeatureFile, Malformed) {
  const fs::path dir = scratch("malformed");
  write_feature_file(dir / "ok.aqf", float_exact(3, 1024, 2));
  const std::string ok = slurp(dir / "ok.aqf");
  const fs::path bad = dir / "bad.aqf";
  auto read = [&] { read_feature_file(bad); };

  dump(bad, "AQF2" + ok.substr(4));
  EXPECT_EQ(error_of(read), ErrorCode::kBadMagic);
  dump(bad, ok.substr(0, ok.size() - 1));
  EXPECT_EQ(error_of(read), ErrorCode::kUnexpectedEof);
  EXPECT_NE(error_text(read).find("unexpected EOF"), std::string::npos);
  dump(bad, ok.substr(0, 10));
  EXPECT_EQ(error_of(read), ErrorCode::kUnexpectedEof);
  dump(bad, ok + "\0"s);
  EXPECT_EQ(error_of(read), ErrorCode::kTrailingBytes);
  dump(bad, "");
  EXPECT_EQ(error_of(read), ErrorCode::kUnexpectedEof);

  std::string nan = ok;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 12 + 4 * 5, &q, 4);
  dump(bad, nan);
  EXPECT_EQ(error_of(read), ErrorCode::kNonFinite);

  std::string inf = ok;
  const float i = std::numeric_limits<float>::infinity();
  std::memcpy(inf.data() + 12, &i, 4);
  dump(bad, inf);
  EXPECT_EQ(error_of(read), ErrorCode::kNonFinite);

  EXPECT_EQ(error_of([&] { read_feature_file(dir / "missing.aqf"); }), ErrorCode::kIo);
  EXPECT_EQ(error_of([&] { read_feature_file(dir / "ok.aqf", StreamKind::kStatic); }), ErrorCode::kBadDimension);
}

TEST(FeatureFile, EmptyAndOddDimension) {
  const fs::path dir = scratch("empty");
  write_feature_file(dir / "empty.aqf", Tensor(0, 1024));
  EXPECT_EQ(error_of([&] { read_feature_file(dir / "empty.aqf"); }), ErrorCode::kEmptyInstanceSet);
  EXPECT_NE(error_text([&] { read_feature_file(dir / "empty.aqf"); }).find("empty instance set"), std::string::npos);
  write_feature_file(dir / "odd.aqf", Tensor(2, 7));
  EXPECT_EQ(error_of([&] { read_feature_file(dir / "odd.aqf"); }), ErrorCode::kBadDimension);
}

TEST(FeatureFile, RejectsUnrepresentable) {
  const fs::path dir = scratch("unrepresentable");
  Tensor t(1, 1024);
  t[0] = 1e300;
  EXPECT_EQ(error_of([&] { write_feature_file(dir / "big.aqf", t); }), ErrorCode::kNonFinite);
}

constexpr const char* kHeader =
    "video_id,dynamic_path,static_path,score_difficulty,score_execution,score_total,split\n";

TEST(Manifest, WellFormed) {
  const fs::path dir = scratch("manifest_ok");
  dump(dir / "m.csv", std::string(kHeader) +
                          "v1,f/v1_d.aqf,f/v1_s.aqf,8.5,7.25,15.75,train\n"
                          "v2,/abs/v2_d.aqf,/abs/v2_s.aqf,9,6,14.5,test\n");
  const auto recs = read_manifest(dir / "m.csv");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].video_id, "v1");
  EXPECT_EQ(recs[0].dynamic_path, dir / "f/v1_d.aqf");
  EXPECT_EQ(recs[0].total, 15.75);
  EXPECT_EQ(recs[0].split, Split::kTrain);
  EXPECT_EQ(recs[1].static_path, fs::path("/abs/v2_s.aqf"));
  EXPECT_EQ(recs[1].split, Split::kTest);
}

TEST(Manifest, WriteReadRoundTrip) {
  const fs::path dir = scratch("manifest_rt");
  std::vector<VideoRecord> recs = {
      {"a", dir / "a_d.aqf", dir / "a_s.aqf", 1.0 / 3.0, 0.1, 0.1 + 1.0 / 3.0, Split::kTrain},
      {"b", dir / "b_d.aqf", dir / "b_s.aqf", 2.0, 1e-17, -4.5, Split::kTest}};
  write_manifest(dir / "m.csv", recs);
  const auto back = read_manifest(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].video_id, recs[i].video_id);
    EXPECT_EQ(back[i].difficulty, recs[i].difficulty);
    EXPECT_EQ(back[i].execution, recs[i].execution);
    EXPECT_EQ(back[i].total, recs[i].total);
    EXPECT_EQ(back[i].split, recs[i].split);
  }
}

TEST(Manifest, Errors) {
  const fs::path dir = scratch("manifest_bad");
  const fs::path m = dir / "m.csv";
  auto read = [&] { read_manifest(m); };

  dump(m, std::string(kHeader) + "v1,a,b,1,2,3,train\nv1,c,d,1,2,3,test\n");
  EXPECT_EQ(error_of(read), ErrorCode::kDuplicateId);
  EXPECT_NE(error_text(read).find("v1"), std::string::npos);

  dump(m, std::string(kHeader) + "v1,a,b,1,2,3,train\nv2,c,d,abc,2,3,test\n");
  EXPECT_EQ(error_of(read), ErrorCode::kParseError);
  EXPECT_NE(error_text(read).find("3"), std::string::npos) << error_text(read);

  dump(m, "video_id,dynamic_path,static_path,score_difficulty,score_execution,split\n");
  EXPECT_EQ(error_of(read), ErrorCode::kMissingColumn);
  EXPECT_NE(error_text(read).find("score_total"), std::string::npos);

  dump(m, "");
  EXPECT_EQ(error_of(read), ErrorCode::kMissingColumn);

  dump(m, std::string(kHeader) + "v1,a,b,1,2,3\n");
  EXPECT_EQ(error_of(read), ErrorCode::kParseError);

  dump(m, std::string(kHeader) + "v1,\"a,x\",b,1,2,3,train\n");
  EXPECT_EQ(error_of(read), ErrorCode::kParseError);

  dump(m, std::string(kHeader) + "v1,a,b,1,2,3,validation\n");
  EXPECT_EQ(error_of(read), ErrorCode::kParseError);

  dump(m, std::string(kHeader) + "v1,a,b,1,2,inf,train\n");
  EXPECT_EQ(error_of(read), ErrorCode::kParseError);

  EXPECT_EQ(error_of([&] { read_manifest(dir / "nope.csv"); }), ErrorCode::kIo);
}

TEST(Manifest, RejectsCommaInPath) {
  const fs::path dir = scratch("manifest_comma");
  std::vector<VideoRecord> recs = {{"a", "x,y.aqf", "s.aqf", 0, 0, 0, Split::kTrain}};
  EXPECT_EQ(error_of([&] { write_manifest(dir / "m.csv", recs); }), ErrorCode::kInvalidArgument);
}

TEST(Normalizer, Endpoints) {
  const std::vector<double> train{12.0, 3.0, 7.5, 20.0};
  const auto n = ScoreNormalizer::fit(train);
  EXPECT_EQ(n.normalize(3.0), 0.0);
  EXPECT_EQ(n.normalize(20.0), 1.0);
  for (double x : {3.0, 4.2, 19.99, 25.0, -1.0}) EXPECT_NEAR(n.inverse(n.normalize(x)), x, 1e-9);
  EXPECT_GT(n.normalize(25.0), 1.0);  // test scores may leave [0, 1]
}

TEST(Normalizer, Degenerate) {
  const std::vector<double> flat{5.0, 5.0};
  EXPECT_THROW(ScoreNormalizer::fit(flat), Error);
  EXPECT_THROW(ScoreNormalizer::fit(std::vector<double>{}), Error);
}

Tensor row_ids(std::size_t n) {
  Tensor t(n, 2);
  for (std::size_t i = 0; i < n; ++i) t(i, 0) = t(i, 1) = static_cast<double>(i);
  return t;
}

TEST(Augment, NoSlackIsIdentity) {
  Rng rng(1);
  const Tensor t = row_ids(6);
  for (auto mode : {AugmentMode::kRandomShift, AugmentMode::kCenter, AugmentMode::kStart}) {
    EXPECT_TRUE(bit_equal(augment_window(t, 6, mode, rng), t));
  }
}

TEST(Augment, StartAndCenter) {
  Rng rng(1);
  const Tensor t = row_ids(5);
  EXPECT_TRUE(bit_equal(augment_window(t, 3, AugmentMode::kStart, rng), t.slice_rows(0, 3)));
  EXPECT_TRUE(bit_equal(augment_window(t, 3, AugmentMode::kCenter, rng), t.slice_rows(1, 4)));
}

TEST(Augment, ZeroWindowKeepsAll) {
  Rng rng(1);
  const Tensor t = row_ids(9);
  EXPECT_TRUE(bit_equal(augment_window(t, 0, AugmentMode::kRandomShift, rng), t));
}

TEST(Augment, ShortInputRepeatPadsLastRow) {
  Rng rng(1);
  const Tensor t = row_ids(3);
  const Tensor w = augment_window(t, 5, AugmentMode::kRandomShift, rng);
  ASSERT_EQ(w.rows(), 5u);
  const std::vector<double> expect{0, 1, 2, 2, 2};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(w(i, 0), expect[i]);
  EXPECT_EQ(error_of([&] { augment_window(Tensor(0, 2), 3, AugmentMode::kStart, rng); }),
            ErrorCode::kEmptyInstanceSet);
}

TEST(Augment, ContiguousAndOrdered) {
  Rng rng(2);
  const Tensor t = row_ids(40);
  for (int k = 0; k < 200; ++k) {
    const Tensor w = augment_window(t, 26, AugmentMode::kRandomShift, rng);
    for (std::size_t i = 1; i < w.rows(); ++i) ASSERT_EQ(w(i, 0), w(i - 1, 0) + 1.0);
  }
}

TEST(Augment, OffsetsUniform) {
  // 10^4 draws over 5 offsets; chi-square with 4 dof, p > 0.01 iff stat < 13.2767.
  Rng rng(3);
  const Tensor t = row_ids(30);
  std::vector<double> counts(5, 0.0);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) counts[static_cast<std::size_t>(augment_window(t, 26, AugmentMode::kRandomShift, rng)(0, 0))] += 1;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
  EXPECT_LT(chi2, 13.2767);
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_videos = 12;
  s.n_test = 4;
  s.n_dynamic = 5;
  s.n_static = 7;
  s.key_count = 2;
  return s;
}

TEST(Synthetic, Deterministic) {
  Rng a(9);
  Rng b(9);
  const auto x = make_synthetic_dataset(small_spec(), a);
  const auto y = make_synthetic_dataset(small_spec(), b);
  ASSERT_EQ(x.videos.size(), y.videos.size());
  for (std::size_t i = 0; i < x.videos.size(); ++i) {
    EXPECT_TRUE(bit_equal(x.videos[i].dynamic, y.videos[i].dynamic));
    EXPECT_TRUE(bit_equal(x.videos[i].stat, y.videos[i].stat));
    EXPECT_EQ(x.videos[i].score, y.videos[i].score);
    EXPECT_EQ(x.videos[i].key_dynamic, y.videos[i].key_dynamic);
  }
}

TEST(Synthetic, Structure) {
  Rng rng(10);
  const auto d = make_synthetic_dataset(small_spec(), rng);
  std::size_t tests = 0;
  for (const auto& v : d.videos) {
    EXPECT_EQ(v.dynamic.rows(), 5u);
    EXPECT_EQ(v.dynamic.cols(), kDynamicInputDim);
    EXPECT_EQ(v.stat.rows(), 7u);
    EXPECT_EQ(v.stat.cols(), kStaticInputDim);
    EXPECT_EQ(v.key_dynamic.size(), 2u);
    EXPECT_TRUE(std::is_sorted(v.key_dynamic.begin(), v.key_dynamic.end()));
    EXPECT_GE(v.score, 0.0);
    EXPECT_LE(v.score, 1.0);
    EXPECT_LE(std::abs(v.magnitude_dynamic), d.spec.max_magnitude);
    tests += v.split == Split::kTest;
  }
  EXPECT_EQ(tests, 4u);
  double norm = 0.0;
  for (double x : d.direction_static.values()) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(Synthetic, KeyInstancesCarryDirection) {
  // Projection onto u is m + N(0,1) on key rows and N(0,1) elsewhere.
  SyntheticSpec s = small_spec();
  s.n_videos = 200;
  s.n_test = 0;
  Rng rng(11);
  const auto d = make_synthetic_dataset(s, rng);
  double key_resid = 0.0;
  double other = 0.0;
  std::size_t nk = 0;
  std::size_t no = 0;
  for (const auto& v : d.videos) {
    for (std::size_t i = 0; i < v.dynamic.rows(); ++i) {
      double p = 0.0;
      for (std::size_t c = 0; c < v.dynamic.cols(); ++c) p += v.dynamic(i, c) * d.direction_dynamic[c];
      if (std::find(v.key_dynamic.begin(), v.key_dynamic.end(), i) != v.key_dynamic.end()) {
        key_resid += p - v.magnitude_dynamic;
        ++nk;
      } else {
        other += p;
        ++no;
      }
    }
  }
  EXPECT_LT(std::abs(key_resid / nk), 0.2);
  EXPECT_LT(std::abs(other / no), 0.2);
}

TEST(Synthetic, NoiseFreeScoreMonotoneInLatent) {
  SyntheticSpec s = small_spec();
  s.n_videos = 60;
  Rng rng(12);
  const auto d = make_synthetic_dataset(s, rng);
  std::vector<double> latent, score;
  for (const auto& v : d.videos) {
    latent.push_back(v.latent);
    score.push_back(v.score);
    EXPECT_EQ(v.latent, s.weight_dynamic * v.magnitude_dynamic + s.weight_static * v.magnitude_static);
  }
  EXPECT_EQ(spearman(latent, score), 1.0);
  for (std::size_t i = 0; i < latent.size(); ++i) {
    for (std::size_t j = 0; j < latent.size(); ++j) {
      if (latent[i] > latent[j]) {
        EXPECT_GT(score[i], score[j]);
      }
    }
  }
}

TEST(Synthetic, InvalidSpecs) {
  Rng rng(13);
  SyntheticSpec s = small_spec();
  s.key_count = 6;
  EXPECT_EQ(error_of([&] { make_synthetic_dataset(s, rng); }), ErrorCode::kInvalidArgument);
  s = small_spec();
  s.n_test = 13;
  EXPECT_EQ(error_of([&] { make_synthetic_dataset(s, rng); }), ErrorCode::kInvalidArgument);
  s = small_spec();
  s.noise_sigma = -1;
  EXPECT_EQ(error_of([&] { make_synthetic_dataset(s, rng); }), ErrorCode::kInvalidArgument);
  s = small_spec();
  s.n_dynamic = 0;
  EXPECT_EQ(error_of([&] { make_synthetic_dataset(s, rng); }), ErrorCode::kInvalidArgument);
}

TEST(Synthetic, WriteAndReadBack) {
  const fs::path dir = scratch("synth");
  Rng rng(14);
  const auto d = make_synthetic_dataset(small_spec(), rng);
  const fs::path manifest = write_synthetic_dataset(dir, d);
  const auto recs = read_manifest(manifest);
  ASSERT_EQ(recs.size(), d.videos.size());
  const auto keys = read_key_sidecar(dir / "keys.csv");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& v = d.videos[i];
    EXPECT_EQ(recs[i].video_id, v.video_id);
    EXPECT_EQ(recs[i].split, v.split);
    const Tensor dyn = read_feature_file(recs[i].dynamic_path, StreamKind::kDynamic);
    const Tensor st = read_feature_file(recs[i].static_path, StreamKind::kStatic);
    EXPECT_LT(max_abs_diff(dyn, v.dynamic), 1e-4);
    EXPECT_EQ(st.rows(), v.stat.rows());
    EXPECT_EQ(keys.at({v.video_id, "dynamic"}), v.key_dynamic);
    EXPECT_EQ(keys.at({v.video_id, "static"}), v.key_static);
  }
  // Same seed, same bytes.
  const fs::path again = scratch("synth_again");
  Rng rng2(14);
  write_synthetic_dataset(again, make_synthetic_dataset(small_spec(), rng2));
  EXPECT_EQ(slurp(dir / "keys.csv"), slurp(again / "keys.csv"));
  EXPECT_EQ(slurp(recs[3].dynamic_path), slurp(again / fs::relative(recs[3].dynamic_path, dir)));
}

}  // namespace
}  // namespace actionnet
