// Copyright 2026 The swinseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "checks.hpp"
#include "swinseg/error.hpp"
#include "swinseg/flops.hpp"

namespace swinseg {
namespace {

TEST(Flops, PaperStageOneWindowAttention) {
  EXPECT_EQ(to_string(wmsa_flops({56, 56, 96, 7})), "145108992");
}

TEST(Flops, PaperStageOneGlobalAttention) {
  EXPECT_EQ(to_string(msa_flops({56, 56, 96, 7})), "2003828736");
}

TEST(Flops, SingleWindowCoincides) {
  EXPECT_EQ(to_string(msa_flops({8, 8, 32, 8})), to_string(wmsa_flops({8, 8, 32, 8})));
}

TEST(Flops, NoOverflowAtLargestExtent) {
  // 2 (hw)^2 C with h = w = 4096, C = 65536 exceeds 64 bits.
  const ComplexityQuery q{4096, 4096, 65536, 7};
  const FlopCount hw = 4096ull * 4096ull;
  const FlopCount c = 65536;
  const FlopCount expected = 4 * hw * c * c + 2 * hw * hw * c;
  EXPECT_EQ(to_string(msa_flops(q)), to_string(expected));
  EXPECT_TRUE(msa_flops(q) > static_cast<FlopCount>(~0ull));
}

TEST(Flops, NonPositiveExtentIsValidationError) {
  EXPECT_THROW(msa_flops({0, 4, 4, 4}), ValidationError);
  EXPECT_THROW(wmsa_flops({4, 4, 4, -1}), ValidationError);
}

TEST(Flops, ExactGridAndOrdering) {
  const auto r = testing::check_flop_counts();
  EXPECT_TRUE(r.pass) << r.detail;
}

}  // namespace
}  // namespace swinseg
