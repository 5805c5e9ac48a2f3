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

#include <span>
#include <vector>

namespace actionnet {

// Ascending ranks starting at 1; ties share the mean of their positions.
std::vector<double> rank(std::span<const double> values);

// Pearson correlation of the two rank vectors. Throws
// kUndefinedCorrelation when either series is constant.
double spearman(std::span<const double> predicted, std::span<const double> actual);

double mean_rho(std::span<const double> rhos);

}  // namespace actionnet
