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

#pragma once

// Shifted-window transformer layers over channels-last feature maps.

#include <array>
#include <utility>
#include <vector>

#include "swinseg/ops.hpp"
#include "swinseg/tensor.hpp"

namespace swinseg {

// Masking constant added to attention logits of cross-region pairs.
inline constexpr double kMaskedLogit = -1e9;

template <typename T>
struct LinearParams {
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out] or undefined
};

template <typename T>
struct LayerNormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  double eps = 1e-5;

  // gamma/beta lengths agree and eps > 0.
  void validate() const;
};

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const LinearParams<T>& p);
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const LayerNormParams<T>& p);

// Window geometry for one block. `shift` is 0 (W-MSA) or window/2 (SW-MSA).
struct WindowConfig {
  Index window = 4;
  Index shift = 0;

  // Throws DimensionError unless window divides both extents and the shift
  // is 0 or floor(window / 2).
  void validate(Index height, Index width) const;
};

// Window actually used on an (height x width) map for nominal window M.
// When the map is no larger than M the window shrinks to the map and the
// shift is dropped, since a single window has no neighbours to talk to.
WindowConfig effective_window(Index height, Index width, Index window, bool shifted);

template <typename T>
struct AttentionParams {
  int heads = 1;
  LinearParams<T> qkv;   // [C, 3C], output laid out as (q | k | v), heads contiguous
  LinearParams<T> proj;  // [C, C]
  // [(2M-1)^2, heads]; undefined disables the relative position bias.
  Tensor<T> relative_bias;
};

template <typename T>
struct SwinBlockParams {
  LayerNormParams<T> norm1;
  AttentionParams<T> attn;
  LayerNormParams<T> norm2;
  LinearParams<T> fc1;  // [C, 4C]
  LinearParams<T> fc2;  // [4C, C]
};

// W-MSA block followed by an SW-MSA block.
template <typename T>
struct SwinBlockPairParams {
  std::array<SwinBlockParams<T>, 2> blocks;
  Index window = 4;
};

template <typename T>
struct PatchEmbedParams {
  Tensor<T> weight;  // [4, 4, Cin, C]
  Tensor<T> bias;    // [C]
  LayerNormParams<T> norm;
};

template <typename T>
struct PatchMergingParams {
  LayerNormParams<T> norm;   // over 4C
  LinearParams<T> reduction;  // [4C, 2C]
};

template <typename T>
struct PatchExpandingParams {
  LinearParams<T> expand;  // [C, 2C]
  LayerNormParams<T> norm;  // over C/2
};

template <typename T>
struct FinalExpandParams {
  LinearParams<T> expand;  // [C, 16C]
};

// 4x4 / stride-4 convolution 3 -> C, then LayerNorm. H, W divisible by 4.
template <typename T>
Tensor<T> patch_partition_embed(const Tensor<T>& image, const PatchEmbedParams<T>& p);

// [B,H,W,C] -> [B * (H/M) * (W/M), M*M, C]; windows and the patches inside
// them are both enumerated row-major.
template <typename T>
Tensor<T> window_partition(const Tensor<T>& x, Index window);
template <typename T>
Tensor<T> window_reverse(const Tensor<T>& windows, Index window, Index height, Index width);

IndexMap window_partition_index(Index batch, Index height, Index width, Index channels,
                                Index window);
IndexMap window_reverse_index(Index batch, Index height, Index width, Index channels,
                              Index window);

// [nWindows, M*M, M*M] additive mask for the cyclically shifted map:
// 0 for pairs from the same pre-shift region, kMaskedLogit otherwise.
// All zeros when shift == 0.
template <typename T>
Tensor<T> build_attention_mask(Index height, Index width, Index window, Index shift);

// Flat (2M-1)^2 table row for every (query, key) pair of an M x M window.
std::vector<Index> relative_position_index(Index window);

// Per window: softmax(Q K^T / sqrt(d) + bias + mask) V, heads concatenated,
// then output-projected. `windows` is [B * nW, N, C]; `mask` is
// [nW, N, N] or undefined.
template <typename T>
Tensor<T> window_attention(const Tensor<T>& windows, const AttentionParams<T>& p,
                           const Tensor<T>& mask);

// One transformer block on x[B,H,W,C] with the given window geometry.
template <typename T>
Tensor<T> swin_block(const Tensor<T>& x, const SwinBlockParams<T>& p, const WindowConfig& wc);

// W-MSA block then SW-MSA block; shape preserved.
template <typename T>
Tensor<T> swin_block_pair(const Tensor<T>& x, const SwinBlockPairParams<T>& p);

// Sub-pixel slot ordering shared by merging and expanding: slot s of a
// factor x factor neighbourhood sits at (row, col) = (s % factor, s / factor).
// For factor 2 this is top-left, bottom-left, top-right, bottom-right.
std::pair<Index, Index> neighborhood_offset(Index slot, Index factor);

// Gather for [B,H,W,C] -> [B,H/2,W/2,4C].
IndexMap patch_merging_index(Index batch, Index height, Index width, Index channels);
// Scatter for [B,H,W,f*f*C] -> [B,f*H,f*W,C].
IndexMap patch_expanding_index(Index batch, Index height, Index width, Index channels,
                               Index factor);

// 2x2 gather to 4C, LayerNorm, linear 4C -> 2C.
template <typename T>
Tensor<T> patch_merging(const Tensor<T>& x, const PatchMergingParams<T>& p);

// Linear C -> 2C, rearrange into 2x2 neighbourhoods of C/2, LayerNorm.
template <typename T>
Tensor<T> patch_expanding(const Tensor<T>& x, const PatchExpandingParams<T>& p);

// Linear C -> 16C, rearrange into 4x4 neighbourhoods of C channels.
template <typename T>
Tensor<T> final_patch_expanding_x4(const Tensor<T>& x, const FinalExpandParams<T>& p);

}  // namespace swinseg
