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

// Differentiable primitives. All feature maps are channels-last (NHWC).

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "swinseg/tensor.hpp"

namespace swinseg {

using IndexMap = std::shared_ptr<const std::vector<Index>>;

// a + b. `b` either matches `a` or has the same rank with extents equal to
// a's or 1 (numpy-style broadcast of b onto a).
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);  // same shape only
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);  // same shape only
template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape);

// Matrix product of 2-D operands or batched product of 3-D operands with a
// shared leading batch extent. Transpose flags apply to the last two axes.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool trans_a = false,
                 bool trans_b = false);

// x[..., in] * weight[in, out] + bias[out]. `bias` may be undefined.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// out.flat[i] = x.flat[(*index)[i]]. Backward scatter-adds, so repeated
// indices are allowed. This is the single primitive behind every
// rearrangement (rolls, window partitions, patch gathers, head splits).
template <typename T>
Tensor<T> gather(const Tensor<T>& x, IndexMap index, Shape out_shape);

// Concatenation along the last axis.
template <typename T>
Tensor<T> concat_last(const Tensor<T>& a, const Tensor<T>& b);

// Normalizes over the last axis with the population variance:
// y = (x - mean) / sqrt(var + eps) * gamma + beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     double eps);

// Max-subtracted softmax along `axis` (negative counts from the back).
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis = -1);

// Tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);
template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// Cross-correlation. x[B,H,W,Cin], weight[kh,kw,Cin,Cout], bias[Cout] or
// undefined. Output extent floor((H + 2p - k) / s) + 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 int stride, int padding);

// 2x2 / stride-2 max pooling of x[B,H,W,C]; H and W must be even.
template <typename T>
Tensor<T> max_pool2x2(const Tensor<T>& x);

// Nearest-neighbour 2x up-sampling of x[B,H,W,C].
template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x);

// Toroidal roll of the spatial axes of x[B,H,W,C]:
// out[b, i, j] = x[b, (i - dy) mod H, (j - dx) mod W].
template <typename T>
Tensor<T> cyclic_shift(const Tensor<T>& x, Index dy, Index dx);

// Mean over all pixels of -log softmax(logits)[label]. logits[..., K] and
// one label per row of the flattened leading axes.
template <typename T>
Tensor<T> cross_entropy_loss(const Tensor<T>& logits, std::span<const std::int32_t> labels);

// Index maps shared by the ops above and by swin.cpp.
IndexMap cyclic_shift_index(Index batch, Index height, Index width, Index channels, Index dy,
                            Index dx);

}  // namespace swinseg
