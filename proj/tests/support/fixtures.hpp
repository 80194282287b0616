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

// Random tensors and layer parameters for tests (64-bit).

#include <filesystem>
#include <string>
#include <vector>

#include "swinseg/rng.hpp"
#include "swinseg/swin.hpp"

namespace swinseg::testing {

using T64 = Tensor<double>;

T64 randn(const Shape& shape, Rng& rng, double stddev = 1.0, bool requires_grad = true);

LinearParams<double> rand_linear(Index in, Index out, Rng& rng, bool bias = true);
LayerNormParams<double> rand_norm(Index channels, Rng& rng);
AttentionParams<double> rand_attention(Index channels, int heads, Index window, Rng& rng,
                                       bool relative_bias = true);
SwinBlockParams<double> rand_block(Index channels, int heads, Index window, Rng& rng);
SwinBlockPairParams<double> rand_pair(Index channels, int heads, Index window, Rng& rng);
PatchEmbedParams<double> rand_embed(Index in_channels, Index channels, Rng& rng);
PatchMergingParams<double> rand_merge(Index channels, Rng& rng);
PatchExpandingParams<double> rand_expand(Index channels, Rng& rng);
FinalExpandParams<double> rand_final(Index channels, Rng& rng);

// Leaf tensors of a parameter struct, for gradient checks.
void collect(const LinearParams<double>& p, std::vector<T64>& out);
void collect(const LayerNormParams<double>& p, std::vector<T64>& out);
void collect(const AttentionParams<double>& p, std::vector<T64>& out);
void collect(const SwinBlockParams<double>& p, std::vector<T64>& out);
void collect(const SwinBlockPairParams<double>& p, std::vector<T64>& out);
void collect(const PatchEmbedParams<double>& p, std::vector<T64>& out);
void collect(const PatchMergingParams<double>& p, std::vector<T64>& out);
void collect(const PatchExpandingParams<double>& p, std::vector<T64>& out);
void collect(const FinalExpandParams<double>& p, std::vector<T64>& out);

// Fresh empty directory under the system temp dir, unique per process.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace swinseg::testing
