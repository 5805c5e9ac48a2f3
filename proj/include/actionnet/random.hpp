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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace actionnet {

using Rng = std::mt19937_64;

// Named sub-stream of a single run seed. Every consumer of randomness
// (initialization, shuffling, windowing, dropout, data synthesis) draws from
// its own stream, keyed by name and optional indices such as
// (epoch, sample), so results do not depend on evaluation order.
inline Rng derive_stream(std::uint64_t seed, std::string_view name,
                         std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::vector<std::uint32_t> words;
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  push(h);
  for (auto i : indices) push(i);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace actionnet
