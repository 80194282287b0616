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

#include "swinseg/swin.hpp"

#include <cmath>
#include <memory>

#include "swinseg/error.hpp"

namespace swinseg {

template <typename T>
void LayerNormParams<T>::validate() const {
  if (!gamma.defined() || !beta.defined() || gamma.numel() != beta.numel()) {
    throw ValidationError("LayerNormParams: gamma and beta must have equal length");
  }
  if (!(eps > 0.0)) throw ValidationError("LayerNormParams: epsilon must be positive");
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const LinearParams<T>& p) {
  return linear(x, p.weight, p.bias);
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const LayerNormParams<T>& p) {
  return layer_norm(x, p.gamma, p.beta, p.eps);
}

void WindowConfig::validate(Index height, Index width) const {
  if (window <= 0) throw DimensionError("window size must be positive");
  if (height % window != 0 || width % window != 0) {
    throw DimensionError("window " + std::to_string(window) + " does not divide " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
  if (shift != 0 && shift != window / 2) {
    throw DimensionError("shift must be 0 or half the window");
  }
}

WindowConfig effective_window(Index height, Index width, Index window, bool shifted) {
  const Index extent = std::min(height, width);
  if (extent <= window) return {extent, 0};
  return {window, shifted ? window / 2 : 0};
}

// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> patch_partition_embed(const Tensor<T>& image, const PatchEmbedParams<T>& p) {
  if (image.rank() != 4) throw DimensionError("patch_partition_embed: expected [B,H,W,C]");
  if (image.dim(1) % 4 != 0 || image.dim(2) % 4 != 0) {
    throw DimensionError("patch_partition_embed: H and W must be divisible by 4, got " +
                         to_string(image.shape()));
  }
  return layer_norm(conv2d(image, p.weight, p.bias, 4, 0), p.norm);
}

IndexMap window_partition_index(Index batch, Index height, Index width, Index channels,
                                Index window) {
  WindowConfig{window, 0}.validate(height, width);
  const Index nh = height / window, nw = width / window;
  auto idx = std::make_shared<std::vector<Index>>();
  idx->reserve(static_cast<std::size_t>(batch * height * width * channels));
  for (Index b = 0; b < batch; ++b)
    for (Index wy = 0; wy < nh; ++wy)
      for (Index wx = 0; wx < nw; ++wx)
        for (Index py = 0; py < window; ++py)
          for (Index px = 0; px < window; ++px) {
            const Index base =
                ((b * height + wy * window + py) * width + wx * window + px) * channels;
            for (Index c = 0; c < channels; ++c) idx->push_back(base + c);
          }
  return idx;
}

IndexMap window_reverse_index(Index batch, Index height, Index width, Index channels,
                              Index window) {
  auto fwd = window_partition_index(batch, height, width, channels, window);
  auto inv = std::make_shared<std::vector<Index>>(fwd->size());
  for (std::size_t i = 0; i < fwd->size(); ++i) (*inv)[(*fwd)[i]] = static_cast<Index>(i);
  return inv;
}

template <typename T>
Tensor<T> window_partition(const Tensor<T>& x, Index window) {
  if (x.rank() != 4) throw DimensionError("window_partition: expected [B,H,W,C]");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  auto idx = window_partition_index(B, H, W, C, window);
  return gather(x, idx, {B * (H / window) * (W / window), window * window, C});
}

template <typename T>
Tensor<T> window_reverse(const Tensor<T>& windows, Index window, Index height, Index width) {
  if (windows.rank() != 3 || windows.dim(1) != window * window) {
    throw DimensionError("window_reverse: expected [B*nW, M*M, C], got " +
                         to_string(windows.shape()));
  }
  WindowConfig{window, 0}.validate(height, width);
  const Index per_image = (height / window) * (width / window);
  if (windows.dim(0) % per_image != 0) {
    throw DimensionError("window_reverse: window count does not match the map size");
  }
  const Index B = windows.dim(0) / per_image, C = windows.dim(2);
  return gather(windows, window_reverse_index(B, height, width, C, window),
                {B, height, width, C});
}

template <typename T>
Tensor<T> build_attention_mask(Index height, Index width, Index window, Index shift) {
  WindowConfig{window, shift}.validate(height, width);
  const Index nh = height / window, nw = width / window, n = window * window;
  std::vector<T> mask(static_cast<std::size_t>(nh * nw * n * n), T(0));
  if (shift > 0) {
    // Region label of each position of the shifted map: the last `window`
    // rows/cols hold wrapped and unwrapped content separated at -shift.
    auto band = [&](Index i, Index extent) -> Index {
      if (i < extent - window) return 0;
      if (i < extent - shift) return 1;
      return 2;
    };
    std::vector<Index> label(static_cast<std::size_t>(height * width));
    for (Index i = 0; i < height; ++i)
      for (Index j = 0; j < width; ++j) label[i * width + j] = band(i, height) * 3 + band(j, width);
    for (Index wy = 0; wy < nh; ++wy)
      for (Index wx = 0; wx < nw; ++wx) {
        T* m = mask.data() + (wy * nw + wx) * n * n;
        for (Index a = 0; a < n; ++a) {
          const Index la = label[(wy * window + a / window) * width + wx * window + a % window];
          for (Index b = 0; b < n; ++b) {
            const Index lb = label[(wy * window + b / window) * width + wx * window + b % window];
            if (la != lb) m[a * n + b] = static_cast<T>(kMaskedLogit);
          }
        }
      }
  }
  return Tensor<T>::from_data({nh * nw, n, n}, std::move(mask));
}

std::vector<Index> relative_position_index(Index window) {
  const Index n = window * window, span = 2 * window - 1;
  std::vector<Index> idx(static_cast<std::size_t>(n * n));
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const Index dy = a / window - b / window + window - 1;
      const Index dx = a % window - b % window + window - 1;
      idx[static_cast<std::size_t>(a * n + b)] = dy * span + dx;
    }
  }
  return idx;
}

template <typename T>
Tensor<T> window_attention(const Tensor<T>& windows, const AttentionParams<T>& p,
                           const Tensor<T>& mask) {
  if (windows.rank() != 3) throw DimensionError("window_attention: expected [B*nW, N, C]");
  const Index bw = windows.dim(0), n = windows.dim(1), c = windows.dim(2);
  const Index heads = p.heads;
  if (heads <= 0 || c % heads != 0) {
    throw DimensionError("window_attention: " + std::to_string(heads) +
                         " heads do not divide channel extent " + std::to_string(c));
  }
  const Index d = c / heads;
  const Index window = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(n))));
  if (window * window != n) throw DimensionError("window_attention: N must be a square");

  Tensor<T> qkv = dense(windows, p.qkv);  // [bw, n, 3c]
  if (qkv.dim(2) != 3 * c) throw DimensionError("window_attention: qkv projection must be C->3C");

  // Split (q | k | v) and heads into [bw * heads, n, d].
  auto split = [&](Index part) {
    auto idx = std::make_shared<std::vector<Index>>();
    idx->reserve(static_cast<std::size_t>(bw * n * c));
    for (Index w = 0; w < bw; ++w)
      for (Index h = 0; h < heads; ++h)
        for (Index t = 0; t < n; ++t)
          for (Index e = 0; e < d; ++e) idx->push_back((w * n + t) * 3 * c + part * c + h * d + e);
    return gather(qkv, idx, {bw * heads, n, d});
  };
  Tensor<T> q = scale(split(0), 1.0 / std::sqrt(static_cast<double>(d)));
  Tensor<T> k = split(1);
  Tensor<T> v = split(2);

  Tensor<T> scores = matmul(q, k, false, true);  // [bw*heads, n, n]
  if (p.relative_bias.defined()) {
    const Index span = 2 * window - 1;
    if (p.relative_bias.rank() != 2 || p.relative_bias.dim(0) != span * span ||
        p.relative_bias.dim(1) != heads) {
      throw DimensionError("window_attention: relative bias table must be [(2M-1)^2, heads]");
    }
    const auto rel = relative_position_index(window);
    auto idx = std::make_shared<std::vector<Index>>();
    idx->reserve(static_cast<std::size_t>(heads * n * n));
    for (Index h = 0; h < heads; ++h)
      for (Index i = 0; i < n * n; ++i) idx->push_back(rel[i] * heads + h);
    Tensor<T> bias = gather(p.relative_bias, idx, {1, heads, n, n});
    scores = add(reshape(scores, {bw, heads, n, n}), bias);
  }
  if (mask.defined()) {
    const Index nwin = mask.dim(0);
    if (mask.rank() != 3 || mask.dim(1) != n || mask.dim(2) != n || bw % nwin != 0) {
      throw DimensionError("window_attention: mask must be [nW, N, N] with nW dividing B*nW");
    }
    scores = add(reshape(scores, {bw / nwin, nwin, heads, n, n}), reshape(mask, {1, nwin, 1, n, n}));
  }
  Tensor<T> attn = softmax(reshape(scores, {bw * heads, n, n}), -1);
  Tensor<T> ctx = matmul(attn, v);  // [bw*heads, n, d]

  auto merge = std::make_shared<std::vector<Index>>();
  merge->reserve(static_cast<std::size_t>(bw * n * c));
  for (Index w = 0; w < bw; ++w)
    for (Index t = 0; t < n; ++t)
      for (Index h = 0; h < heads; ++h)
        for (Index e = 0; e < d; ++e) merge->push_back(((w * heads + h) * n + t) * d + e);
  return dense(gather(ctx, merge, {bw, n, c}), p.proj);
}

template <typename T>
Tensor<T> swin_block(const Tensor<T>& x, const SwinBlockParams<T>& p, const WindowConfig& wc) {
  if (x.rank() != 4) throw DimensionError("swin_block: expected [B,H,W,C]");
  const Index H = x.dim(1), W = x.dim(2);
  wc.validate(H, W);
  Tensor<T> h = layer_norm(x, p.norm1);
  if (wc.shift > 0) h = cyclic_shift(h, -wc.shift, -wc.shift);
  Tensor<T> mask;
  if (wc.shift > 0) mask = build_attention_mask<T>(H, W, wc.window, wc.shift);
  h = window_attention(window_partition(h, wc.window), p.attn, mask);
  h = window_reverse(h, wc.window, H, W);
  if (wc.shift > 0) h = cyclic_shift(h, wc.shift, wc.shift);
  Tensor<T> z = add(x, h);
  Tensor<T> m = dense(gelu(dense(layer_norm(z, p.norm2), p.fc1)), p.fc2);
  return add(z, m);
}

template <typename T>
Tensor<T> swin_block_pair(const Tensor<T>& x, const SwinBlockPairParams<T>& p) {
  if (x.rank() != 4) throw DimensionError("swin_block_pair: expected [B,H,W,C]");
  const Index H = x.dim(1), W = x.dim(2);
  Tensor<T> z = swin_block(x, p.blocks[0], effective_window(H, W, p.window, false));
  return swin_block(z, p.blocks[1], effective_window(H, W, p.window, true));
}

// ---------------------------------------------------------------------------

std::pair<Index, Index> neighborhood_offset(Index slot, Index factor) {
  return {slot % factor, slot / factor};
}

IndexMap patch_merging_index(Index batch, Index height, Index width, Index channels) {
  if (height % 2 != 0 || width % 2 != 0) {
    throw DimensionError("patch merging needs even extents, got " + std::to_string(height) +
                         "x" + std::to_string(width));
  }
  const Index ho = height / 2, wo = width / 2;
  auto idx = std::make_shared<std::vector<Index>>();
  idx->reserve(static_cast<std::size_t>(batch * height * width * channels));
  for (Index b = 0; b < batch; ++b)
    for (Index i = 0; i < ho; ++i)
      for (Index j = 0; j < wo; ++j)
        for (Index s = 0; s < 4; ++s) {
          const auto [dy, dx] = neighborhood_offset(s, 2);
          const Index base = ((b * height + 2 * i + dy) * width + 2 * j + dx) * channels;
          for (Index c = 0; c < channels; ++c) idx->push_back(base + c);
        }
  return idx;
}

IndexMap patch_expanding_index(Index batch, Index height, Index width, Index channels,
                               Index factor) {
  const Index ff = factor * factor;
  const Index ho = height * factor, wo = width * factor;
  auto idx = std::make_shared<std::vector<Index>>();
  idx->reserve(static_cast<std::size_t>(batch * ho * wo * channels));
  for (Index b = 0; b < batch; ++b)
    for (Index y = 0; y < ho; ++y)
      for (Index x = 0; x < wo; ++x) {
        const Index dy = y % factor, dx = x % factor;
        const Index slot = dx * factor + dy;  // inverse of neighborhood_offset
        const Index base = ((b * height + y / factor) * width + x / factor) * ff * channels +
                           slot * channels;
        for (Index c = 0; c < channels; ++c) idx->push_back(base + c);
      }
  return idx;
}

template <typename T>
Tensor<T> patch_merging(const Tensor<T>& x, const PatchMergingParams<T>& p) {
  if (x.rank() != 4) throw DimensionError("patch_merging: expected [B,H,W,C]");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  Tensor<T> g = gather(x, patch_merging_index(B, H, W, C), {B, H / 2, W / 2, 4 * C});
  return dense(layer_norm(g, p.norm), p.reduction);
}

template <typename T>
Tensor<T> patch_expanding(const Tensor<T>& x, const PatchExpandingParams<T>& p) {
  if (x.rank() != 4) throw DimensionError("patch_expanding: expected [B,H,W,C]");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  if (C % 2 != 0) throw DimensionError("patch_expanding: channel extent must be even");
  Tensor<T> e = dense(x, p.expand);
  if (e.dim(3) != 2 * C) throw DimensionError("patch_expanding: expansion must be C->2C");
  Tensor<T> r = gather(e, patch_expanding_index(B, H, W, C / 2, 2), {B, 2 * H, 2 * W, C / 2});
  return layer_norm(r, p.norm);
}

template <typename T>
Tensor<T> final_patch_expanding_x4(const Tensor<T>& x, const FinalExpandParams<T>& p) {
  if (x.rank() != 4) throw DimensionError("final_patch_expanding_x4: expected [B,H,W,C]");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  Tensor<T> e = dense(x, p.expand);
  if (e.dim(3) != 16 * C) throw DimensionError("final_patch_expanding_x4: expansion must be C->16C");
  return gather(e, patch_expanding_index(B, H, W, C, 4), {B, 4 * H, 4 * W, C});
}

#define SWINSEG_INSTANTIATE_SWIN(T)                                                            \
  template struct LayerNormParams<T>;                                                          \
  template Tensor<T> dense(const Tensor<T>&, const LinearParams<T>&);                          \
  template Tensor<T> layer_norm(const Tensor<T>&, const LayerNormParams<T>&);                  \
  template Tensor<T> patch_partition_embed(const Tensor<T>&, const PatchEmbedParams<T>&);      \
  template Tensor<T> window_partition(const Tensor<T>&, Index);                                \
  template Tensor<T> window_reverse(const Tensor<T>&, Index, Index, Index);                    \
  template Tensor<T> build_attention_mask<T>(Index, Index, Index, Index);                      \
  template Tensor<T> window_attention(const Tensor<T>&, const AttentionParams<T>&,             \
                                      const Tensor<T>&);                                       \
  template Tensor<T> swin_block(const Tensor<T>&, const SwinBlockParams<T>&,                   \
                                const WindowConfig&);                                          \
  template Tensor<T> swin_block_pair(const Tensor<T>&, const SwinBlockPairParams<T>&);         \
  template Tensor<T> patch_merging(const Tensor<T>&, const PatchMergingParams<T>&);            \
  template Tensor<T> patch_expanding(const Tensor<T>&, const PatchExpandingParams<T>&);        \
  template Tensor<T> final_patch_expanding_x4(const Tensor<T>&, const FinalExpandParams<T>&);

SWINSEG_INSTANTIATE_SWIN(float)
SWINSEG_INSTANTIATE_SWIN(double)

}  // namespace swinseg
