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

#include "actionnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "actionnet/error.hpp"

namespace actionnet {

std::vector<double> rank(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "rank of an empty series");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFinite, "rank input has a non-finite value at index " + std::to_string(i));
    }
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share rank mean(i+1..j+1)
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorCode::kInvalidArgument, "spearman series lengths differ: " +
                                                 std::to_string(predicted.size()) + " vs " +
                                                 std::to_string(actual.size()));
  }
  if (predicted.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "spearman needs at least two pairs");
  }
  const std::vector<double> x = rank(predicted);
  const std::vector<double> y = rank(actual);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kUndefinedCorrelation,
                sxx == 0.0 ? "predicted series is constant" : "actual series is constant");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mean_rho(std::span<const double> rhos) {
  if (rhos.empty()) throw Error(ErrorCode::kInvalidArgument, "mean of zero correlations");
  return std::accumulate(rhos.begin(), rhos.end(), 0.0) / static_cast<double>(rhos.size());
}

}  // namespace actionnet
