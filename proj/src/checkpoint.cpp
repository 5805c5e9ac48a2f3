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

// ANPW checkpoint:
//   "ANPW" | u32 version | u32 tensor count |
//   per tensor: u16 name length, name bytes, u32 rows, u32 cols,
//               rows*cols f64 values
// All integers and reals little-endian.

#include <cmath>
#include <limits>

#include "actionnet/error.hpp"
#include "actionnet/model.hpp"
#include "binary_io.hpp"

namespace actionnet {

namespace {
constexpr std::string_view kMagic = "ANPW";
}

void save_params(const std::filesystem::path& path, const ModelParams& params) {
  detail::ByteWriter w;
  std::uint32_t count = 0;
  for_each_param(params, [&](const std::string&, const Tensor&, ParamGroup) { ++count; });
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(count);
  for_each_param(params, [&](const std::string& name, const Tensor& t, ParamGroup) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::kInvalidArgument, "tensor name too long: " + name);
    }
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(t.rows()));
    w.u32(static_cast<std::uint32_t>(t.cols()));
    for (double v : t.values()) w.f64(v);
  });
  w.write_to(path);
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  if (r.bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kBadMagic, "'" + path.string() + "' is not an ANPW checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kCheckpointVersion));
  }
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = r.bytes(r.u16());
    const std::uint64_t rows = r.u32();
    const std::uint64_t cols = r.u32();
    r.need(rows * cols * 8);
    nt.value = Tensor(rows, cols);
    for (auto& v : nt.value.values()) {
      v = r.f64();
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite, "tensor '" + nt.name + "' holds a non-finite value");
      }
    }
    out.push_back(std::move(nt));
  }
  r.expect_end();
  return out;
}

ModelParams load_params(const std::filesystem::path& path, const ModelConfig& config) {
  std::vector<NamedTensor> stored = read_checkpoint(path);
  ModelParams params = param_layout(config);
  std::size_t index = 0;
  for_each_param(params, [&](const std::string& name, Tensor& t, ParamGroup) {
    if (index >= stored.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "checkpoint has no tensor '" + name + "' required by the configuration");
    }
    NamedTensor& s = stored[index++];
    if (s.name != name) {
      throw Error(ErrorCode::kShapeMismatch,
                  "checkpoint tensor '" + s.name + "' found where '" + name + "' was expected");
    }
    if (!s.value.same_shape(t)) {
      throw Error(ErrorCode::kShapeMismatch, "tensor '" + name + "' is " + s.value.shape_str() +
                                                 ", configuration expects " + t.shape_str());
    }
    t = std::move(s.value);
  });
  if (index != stored.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "checkpoint holds " + std::to_string(stored.size()) + " tensors, configuration expects " +
                    std::to_string(index));
  }
  return params;
}

}  // namespace actionnet
