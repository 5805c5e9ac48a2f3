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

#include <vector>

#include "actionnet/error.hpp"
#include "actionnet/tensor.hpp"

namespace actionnet {
namespace {

TEST(Tensor, InitializerListIsRowMajor) {
  Tensor t{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t[4], 5.0);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_EQ(t.size(), t.rows() * t.cols());
}

TEST(Tensor, RaggedInitializerRejected) {
  EXPECT_THROW((Tensor{{1, 2}, {3}}), Error);
}

TEST(Tensor, MatmulIdentity) {
  Tensor a{{1, 2}, {3, 4}};
  EXPECT_TRUE(bit_equal(matmul(a, Tensor::identity(2)), a));
  Tensor b{{5}, {7}};
  EXPECT_TRUE(bit_equal(matmul(Tensor::identity(2), b), b));
}

TEST(Tensor, MatmulShapeMismatch) {
  try {
    matmul(Tensor(2, 3), Tensor(2, 3));
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos) << e.what();
  }
}

TEST(Tensor, TransposedProductsAgree) {
  Tensor a{{1, -2, 0.5}, {3, 4, -1}};
  Tensor b{{2, 1}, {0, -3}};
  EXPECT_LT(max_abs_diff(matmul_tn(b, a), matmul(transpose(b), a)), 1e-15);
  EXPECT_LT(max_abs_diff(matmul_nt(a, a), matmul(a, transpose(a))), 1e-15);
}

TEST(Tensor, ConcatCols) {
  Tensor a{{1, 2}};
  Tensor b{{3, 4, 5}};
  EXPECT_TRUE(bit_equal(concat_cols(a, b), Tensor{{1, 2, 3, 4, 5}}));
  EXPECT_TRUE(bit_equal(concat_cols(a, Tensor(1, 0)), a));
  EXPECT_THROW(concat_cols(Tensor(2, 1), Tensor(3, 1)), Error);
}

TEST(Tensor, SliceAndGather) {
  Tensor t{{0}, {1}, {2}, {3}};
  EXPECT_TRUE(bit_equal(t.slice_rows(1, 3), Tensor{{1}, {2}}));
  std::vector<std::size_t> idx{3, 0, 3};
  EXPECT_TRUE(bit_equal(t.gather_rows(idx), Tensor{{3}, {0}, {3}}));
  EXPECT_THROW(t.slice_rows(2, 5), Error);
}

TEST(Tensor, ItemRequiresScalar) {
  EXPECT_EQ(Tensor(1, 1, 2.5).item(), 2.5);
  EXPECT_THROW(Tensor(1, 2).item(), Error);
}

TEST(Tensor, ElementwiseArithmetic) {
  Tensor a{{1, 2}};
  Tensor b{{0.5, -1}};
  EXPECT_TRUE(bit_equal(a + b, Tensor{{1.5, 1}}));
  EXPECT_TRUE(bit_equal(a - b, Tensor{{0.5, 3}}));
  EXPECT_TRUE(bit_equal(a * 2.0, Tensor{{2, 4}}));
  EXPECT_THROW(a += Tensor(2, 1), Error);
}

}  // namespace
}  // namespace actionnet
