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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "swinseg/error.hpp"
#include "swinseg/swin.hpp"

namespace swinseg {
namespace {

using testing::T64;

T64 iota(Shape shape) {
  std::vector<double> v(static_cast<std::size_t>(numel(shape)));
  std::iota(v.begin(), v.end(), 0.0);
  return T64::from_data(std::move(shape), std::move(v));
}

T64 eye(Index n) {
  auto t = T64::zeros({n, n});
  for (Index i = 0; i < n; ++i) t.mutable_data()[static_cast<std::size_t>(i * n + i)] = 1.0;
  return t;
}

// ---- patch embedding

TEST(PatchEmbed, DeskAndPaperShapes) {
  Rng rng(1);
  auto small = testing::rand_embed(3, 48, rng);
  EXPECT_EQ(patch_partition_embed(T64::zeros({1, 64, 64, 3}), small).shape(), (Shape{1, 16, 16, 48}));
  auto paper = testing::rand_embed(3, 96, rng);
  EXPECT_EQ(patch_partition_embed(T64::zeros({1, 224, 224, 3}), paper).shape(),
            (Shape{1, 56, 56, 96}));
}

TEST(PatchEmbed, ConstantImageGivesConstantMap) {
  Rng rng(2);
  auto p = testing::rand_embed(3, 8, rng);
  p.bias = T64::zeros({8});
  auto y = patch_partition_embed(T64::full({1, 16, 12, 3}, 0.37), p);
  for (Index i = 0; i < y.numel(); ++i) {
    EXPECT_EQ(y.vec()[static_cast<std::size_t>(i)], y.vec()[static_cast<std::size_t>(i % 8)]);
  }
}

TEST(PatchEmbed, IndivisibleExtentIsDimensionError) {
  Rng rng(3);
  auto p = testing::rand_embed(3, 8, rng);
  EXPECT_THROW(patch_partition_embed(T64::zeros({1, 10, 16, 3}), p), DimensionError);
}

// ---- windows

TEST(Window, FullMapIsOneWindow) {
  auto x = iota({1, 4, 4, 2});
  auto w = window_partition(x, 4);
  EXPECT_EQ(w.shape(), (Shape{1, 16, 2}));
  EXPECT_EQ(w.vec(), x.vec());
}

TEST(Window, HandEnumerationOfFourWindows) {
  auto x = iota({1, 4, 4, 1});
  auto w = window_partition(x, 2);
  ASSERT_EQ(w.shape(), (Shape{4, 4, 1}));
  const std::vector<double> expected{0, 1, 4, 5, 2, 3, 6, 7, 8, 9, 12, 13, 10, 11, 14, 15};
  EXPECT_EQ(w.vec(), expected);
}

TEST(Window, RoundTripIsExact) {
  Rng rng(4);
  for (auto [h, w, m] : {std::tuple<Index, Index, Index>{8, 8, 4}, {12, 8, 4}, {14, 21, 7}, {6, 6, 1}}) {
    auto x = testing::randn({2, h, w, 3}, rng, 1.0, false);
    EXPECT_EQ(window_reverse(window_partition(x, m), m, h, w).vec(), x.vec());
  }
}

TEST(Window, IndivisibleIsDimensionError) {
  EXPECT_THROW(window_partition(T64::zeros({1, 6, 8, 1}), 4), DimensionError);
  EXPECT_THROW((WindowConfig{4, 1}.validate(8, 8)), DimensionError);
  EXPECT_NO_THROW((WindowConfig{4, 2}.validate(8, 8)));
}

TEST(Window, EffectiveWindowClampsToSmallMaps) {
  auto wc = effective_window(2, 2, 4, true);
  EXPECT_EQ(wc.window, 2);
  EXPECT_EQ(wc.shift, 0);
  wc = effective_window(8, 8, 4, true);
  EXPECT_EQ(wc.window, 4);
  EXPECT_EQ(wc.shift, 2);
  EXPECT_EQ(effective_window(8, 8, 4, false).shift, 0);
}

// ---- masks

TEST(Mask, NoShiftIsAllZero) {
  auto m = build_attention_mask<double>(8, 8, 4, 0);
  EXPECT_EQ(m.shape(), (Shape{4, 16, 16}));
  EXPECT_TRUE(std::all_of(m.vec().begin(), m.vec().end(), [](double v) { return v == 0.0; }));
}

TEST(Mask, SingleWindowRegionsMatchBruteForceLabels) {
  auto m = build_attention_mask<double>(4, 4, 4, 2);
  ASSERT_EQ(m.shape(), (Shape{1, 16, 16}));
  // Group tokens by the oracle's region relation and count the classes.
  std::vector<int> region(16, -1);
  int regions = 0;
  for (Index a = 0; a < 16; ++a) {
    if (region[static_cast<std::size_t>(a)] >= 0) continue;
    for (Index b = a; b < 16; ++b) {
      if (testing::same_pre_shift_region(4, 4, 2, a / 4, a % 4, b / 4, b % 4)) {
        region[static_cast<std::size_t>(b)] = regions;
      }
    }
    ++regions;
  }
  // With the window equal to the map, each axis splits into two bands.
  EXPECT_EQ(regions, 4);
  for (Index a = 0; a < 16; ++a) {
    for (Index b = 0; b < 16; ++b) {
      const double v = m.vec()[static_cast<std::size_t>(a * 16 + b)];
      if (region[static_cast<std::size_t>(a)] == region[static_cast<std::size_t>(b)]) {
        EXPECT_EQ(v, 0.0);
      } else {
        EXPECT_EQ(v, kMaskedLogit);
      }
    }
  }
}

TEST(Mask, NineRegionsOnLargerMaps) {
  // 8x8 map, M=4, shift 2: three bands per axis give nine regions, seen
  // as distinct mask rows across the four windows.
  auto m = build_attention_mask<double>(8, 8, 4, 2);
  std::set<std::vector<double>> rows;
  for (Index win = 0; win < 4; ++win) {
    for (Index a = 0; a < 16; ++a) {
      const auto* p = m.vec().data() + (win * 16 + a) * 16;
      rows.insert(std::vector<double>(p, p + 16));
    }
  }
  EXPECT_EQ(rows.size(), 9u);
}

TEST(Mask, MaskedMassAndRegionLabels) {
  const auto r = testing::check_shifted_window_masking();
  EXPECT_TRUE(r.pass) << r.detail;
}

// ---- attention

TEST(Attention, SinglePatchWindowIsValueThenOutputProjection) {
  Rng rng(5);
  auto p = testing::rand_attention(4, 2, 1, rng);
  auto x = testing::randn({3, 1, 4}, rng, 1.0, false);
  auto y = window_attention(x, p, T64{});
  // Weight 1 on the only key: y = (x Wv + bv) Wo + bo.
  const auto& wq = p.qkv.weight.vec();
  for (Index t = 0; t < 3; ++t) {
    std::vector<double> v(4, 0.0);
    for (Index o = 0; o < 4; ++o) {
      double s = p.qkv.bias.vec()[static_cast<std::size_t>(8 + o)];
      for (Index i = 0; i < 4; ++i) {
        s += x.vec()[static_cast<std::size_t>(t * 4 + i)] * wq[static_cast<std::size_t>(i * 12 + 8 + o)];
      }
      v[static_cast<std::size_t>(o)] = s;
    }
    for (Index o = 0; o < 4; ++o) {
      double s = p.proj.bias.vec()[static_cast<std::size_t>(o)];
      for (Index i = 0; i < 4; ++i) {
        s += v[static_cast<std::size_t>(i)] * p.proj.weight.vec()[static_cast<std::size_t>(i * 4 + o)];
      }
      EXPECT_NEAR(y.vec()[static_cast<std::size_t>(t * 4 + o)], s, 1e-12);
    }
  }
}

TEST(Attention, UniformQueryKeyAveragesValues) {
  Rng rng(6);
  const Index c = 4, n = 16;
  AttentionParams<double> p;
  p.heads = 2;
  auto w = T64::zeros({c, 3 * c});
  for (Index i = 0; i < c; ++i) w.mutable_data()[static_cast<std::size_t>(i * 3 * c + 2 * c + i)] = 1.0;
  p.qkv = {w, T64{}};
  p.proj = {eye(c), T64{}};
  auto x = testing::randn({2, n, c}, rng, 1.0, false);
  auto y = window_attention(x, p, T64{});
  for (Index b = 0; b < 2; ++b) {
    for (Index ch = 0; ch < c; ++ch) {
      double mean = 0;
      for (Index t = 0; t < n; ++t) mean += x.vec()[static_cast<std::size_t>((b * n + t) * c + ch)];
      mean /= static_cast<double>(n);
      for (Index t = 0; t < n; ++t) {
        EXPECT_NEAR(y.vec()[static_cast<std::size_t>((b * n + t) * c + ch)], mean, 1e-12);
      }
    }
  }
}

TEST(Attention, ChannelHeadMismatchIsDimensionError) {
  Rng rng(7);
  auto p = testing::rand_attention(6, 4, 2, rng);
  EXPECT_THROW(window_attention(T64::zeros({1, 4, 6}), p, T64{}), DimensionError);
}

TEST(Attention, RelativePositionIndexIsSymmetricOffsetTable) {
  const Index m = 3;
  const auto idx = relative_position_index(m);
  ASSERT_EQ(idx.size(), static_cast<std::size_t>(m * m * m * m));
  for (Index a = 0; a < m * m; ++a) {
    for (Index b = 0; b < m * m; ++b) {
      const Index dr = a / m - b / m + m - 1, dc = a % m - b % m + m - 1;
      EXPECT_EQ(idx[static_cast<std::size_t>(a * m * m + b)], dr * (2 * m - 1) + dc);
    }
  }
}

TEST(Attention, FullWindowMatchesGlobalOracle) {
  const auto r = testing::check_global_attention_oracle();
  EXPECT_TRUE(r.pass) << r.detail;
}

// ---- blocks

TEST(Block, ZeroOutputProjectionsGiveIdentity) {
  Rng rng(8);
  auto pair = testing::rand_pair(8, 2, 4, rng);
  for (auto& blk : pair.blocks) {
    blk.attn.proj.weight = T64::zeros(blk.attn.proj.weight.shape());
    blk.attn.proj.bias = T64::zeros(blk.attn.proj.bias.shape());
    blk.fc2.weight = T64::zeros(blk.fc2.weight.shape());
    blk.fc2.bias = T64::zeros(blk.fc2.bias.shape());
  }
  auto x = testing::randn({1, 8, 8, 8}, rng, 1.0, false);
  EXPECT_EQ(swin_block_pair(x, pair).vec(), x.vec());
}

TEST(Block, DeskStageShapePreserved) {
  Rng rng(9);
  auto pair = testing::rand_pair(48, 3, 4, rng);
  auto x = testing::randn({1, 16, 16, 48}, rng, 1.0, false);
  EXPECT_EQ(swin_block_pair(x, pair).shape(), x.shape());
}

TEST(Block, PairGradientMatchesFiniteDifferences) {
  Rng rng(10);
  auto pair = testing::rand_pair(4, 2, 2, rng);
  auto x = testing::randn({1, 4, 4, 4}, rng);
  std::vector<T64> inputs{x};
  testing::collect(pair, inputs);
  testing::GradCheckOptions opts;
  opts.max_entries = 16;
  const auto r = testing::gradcheck(
      [&] { return testing::random_projection(swin_block_pair(x, pair), 5); }, inputs, opts);
  EXPECT_LT(r.max_rel_error, testing::kPrimitiveGradTol) << r.worst;
}

TEST(Layers, CompositeGradientsMatchFiniteDifferences) {
  const auto r = testing::check_layer_gradients();
  EXPECT_TRUE(r.pass) << r.detail;
}

// ---- merging and expanding

TEST(Merge, ShapeArithmetic) {
  Rng rng(11);
  EXPECT_EQ(patch_merging(testing::randn({1, 2, 2, 1}, rng, 1.0, false), testing::rand_merge(1, rng)).shape(),
            (Shape{1, 1, 1, 2}));
  EXPECT_EQ(patch_merging(T64::zeros({1, 16, 16, 48}), testing::rand_merge(48, rng)).shape(),
            (Shape{1, 8, 8, 96}));
  EXPECT_THROW(patch_merging(T64::zeros({1, 3, 4, 2}), testing::rand_merge(2, rng)), DimensionError);
}

TEST(Merge, SlotOrderIsTopLeftBottomLeftTopRightBottomRight) {
  EXPECT_EQ(neighborhood_offset(0, 2), (std::pair<Index, Index>{0, 0}));
  EXPECT_EQ(neighborhood_offset(1, 2), (std::pair<Index, Index>{1, 0}));
  EXPECT_EQ(neighborhood_offset(2, 2), (std::pair<Index, Index>{0, 1}));
  EXPECT_EQ(neighborhood_offset(3, 2), (std::pair<Index, Index>{1, 1}));
}

TEST(Merge, GatherIsPermutationOfIndexedInput) {
  const Index h = 4, w = 6, c = 3;
  auto x = iota({1, h, w, c});
  auto g = gather(x, patch_merging_index(1, h, w, c), {1, h / 2, w / 2, 4 * c});
  auto sorted = g.vec();
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, x.vec());
  // Output (i, j), slot s, channel k holds x[2i + dr, 2j + dc, k].
  for (Index i = 0; i < h / 2; ++i) {
    for (Index j = 0; j < w / 2; ++j) {
      for (Index s = 0; s < 4; ++s) {
        const auto [dr, dc] = neighborhood_offset(s, 2);
        for (Index k = 0; k < c; ++k) {
          const double got = g.vec()[static_cast<std::size_t>(((i * (w / 2) + j) * 4 + s) * c + k)];
          EXPECT_EQ(got, static_cast<double>(((2 * i + dr) * w + 2 * j + dc) * c + k));
        }
      }
    }
  }
}

TEST(Merge, IdentityReductionWithoutNormIsPureGather) {
  // With LN neutralised by a huge eps and the linear set to identity the
  // merged output is the gathered input scaled by 1/sqrt(eps).
  const Index c = 2;
  PatchMergingParams<double> p;
  p.norm = {T64::full({4 * c}, 1.0), T64::zeros({4 * c}), 1e12};
  auto red = T64::zeros({4 * c, 2 * c});
  for (Index i = 0; i < 2 * c; ++i) red.mutable_data()[static_cast<std::size_t>(i * 2 * c + i)] = 1.0;
  p.reduction = {red, T64{}};
  auto x = iota({1, 2, 2, c});
  auto y = patch_merging(x, p);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 2 * c}));
  double mean = 3.5;  // mean of 0..7
  // Slots 0 and 1 are (0,0) and (1,0): values {0,1} and {4,5}.
  const std::vector<double> gathered{0, 1, 4, 5};
  for (Index k = 0; k < 2 * c; ++k) {
    EXPECT_NEAR(y.vec()[static_cast<std::size_t>(k)] * 1e6, gathered[static_cast<std::size_t>(k)] - mean, 1e-6);
  }
}

TEST(Expand, ShapeArithmetic) {
  Rng rng(12);
  EXPECT_EQ(patch_expanding(T64::zeros({1, 1, 1, 4}), testing::rand_expand(4, rng)).shape(),
            (Shape{1, 2, 2, 2}));
  EXPECT_THROW(patch_expanding(T64::zeros({1, 1, 1, 3}), testing::rand_expand(3, rng)),
               DimensionError);
  auto merged = patch_merging(patch_expanding(T64::zeros({1, 4, 4, 8}), testing::rand_expand(8, rng)),
                              testing::rand_merge(4, rng));
  EXPECT_EQ(merged.shape(), (Shape{1, 4, 4, 8}));
}

TEST(Expand, ScatterInvertsMergeGather) {
  for (auto [h, w, c] : {std::tuple<Index, Index, Index>{2, 2, 1}, {4, 6, 3}, {8, 8, 5}}) {
    const auto merge = patch_merging_index(1, h, w, c);
    const auto expand = patch_expanding_index(1, h / 2, w / 2, c, 2);
    ASSERT_EQ(merge->size(), expand->size());
    for (std::size_t i = 0; i < merge->size(); ++i) {
      EXPECT_EQ((*merge)[static_cast<std::size_t>((*expand)[i])], static_cast<Index>(i));
    }
  }
}

TEST(Expand, FinalTimesFourShapes) {
  Rng rng(13);
  EXPECT_EQ(final_patch_expanding_x4(T64::zeros({1, 16, 16, 48}), testing::rand_final(48, rng)).shape(),
            (Shape{1, 64, 64, 48}));
  EXPECT_EQ(final_patch_expanding_x4(T64::zeros({1, 56, 56, 96}), testing::rand_final(96, rng)).shape(),
            (Shape{1, 224, 224, 96}));
}

TEST(Expand, FinalIndexIsPermutation) {
  const auto idx = patch_expanding_index(1, 3, 2, 2, 4);
  std::vector<Index> sorted(idx->begin(), idx->end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], static_cast<Index>(i));
}

}  // namespace
}  // namespace swinseg
