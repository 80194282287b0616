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

#include "fixtures.hpp"

#include <unistd.h>

#include <cmath>

namespace swinseg::testing {

T64 randn(const Shape& shape, Rng& rng, double stddev, bool requires_grad) {
  std::vector<double> v(static_cast<std::size_t>(numel(shape)));
  for (double& x : v) x = stddev * rng.normal();
  return T64::from_data(shape, std::move(v), requires_grad);
}

LinearParams<double> rand_linear(Index in, Index out, Rng& rng, bool bias) {
  LinearParams<double> p;
  p.weight = randn({in, out}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
  if (bias) p.bias = randn({out}, rng, 0.1);
  return p;
}

LayerNormParams<double> rand_norm(Index channels, Rng& rng) {
  LayerNormParams<double> p;
  std::vector<double> g(static_cast<std::size_t>(channels));
  for (double& x : g) x = 1.0 + 0.1 * rng.normal();
  p.gamma = T64::from_data({channels}, std::move(g), true);
  p.beta = randn({channels}, rng, 0.1);
  return p;
}

AttentionParams<double> rand_attention(Index channels, int heads, Index window, Rng& rng,
                                       bool relative_bias) {
  AttentionParams<double> p;
  p.heads = heads;
  p.qkv = rand_linear(channels, 3 * channels, rng);
  p.proj = rand_linear(channels, channels, rng);
  if (relative_bias) p.relative_bias = randn({(2 * window - 1) * (2 * window - 1), heads}, rng, 0.5);
  return p;
}

SwinBlockParams<double> rand_block(Index channels, int heads, Index window, Rng& rng) {
  SwinBlockParams<double> p;
  p.norm1 = rand_norm(channels, rng);
  p.attn = rand_attention(channels, heads, window, rng);
  p.norm2 = rand_norm(channels, rng);
  p.fc1 = rand_linear(channels, 4 * channels, rng);
  p.fc2 = rand_linear(4 * channels, channels, rng);
  return p;
}

SwinBlockPairParams<double> rand_pair(Index channels, int heads, Index window, Rng& rng) {
  SwinBlockPairParams<double> p;
  p.window = window;
  p.blocks[0] = rand_block(channels, heads, window, rng);
  p.blocks[1] = rand_block(channels, heads, window, rng);
  return p;
}

PatchEmbedParams<double> rand_embed(Index in_channels, Index channels, Rng& rng) {
  PatchEmbedParams<double> p;
  p.weight = randn({4, 4, in_channels, channels}, rng, 0.25);
  p.bias = randn({channels}, rng, 0.1);
  p.norm = rand_norm(channels, rng);
  return p;
}

PatchMergingParams<double> rand_merge(Index channels, Rng& rng) {
  PatchMergingParams<double> p;
  p.norm = rand_norm(4 * channels, rng);
  p.reduction = rand_linear(4 * channels, 2 * channels, rng, false);
  return p;
}

PatchExpandingParams<double> rand_expand(Index channels, Rng& rng) {
  PatchExpandingParams<double> p;
  p.expand = rand_linear(channels, 2 * channels, rng, false);
  p.norm = rand_norm(channels / 2, rng);
  return p;
}

FinalExpandParams<double> rand_final(Index channels, Rng& rng) {
  FinalExpandParams<double> p;
  p.expand = rand_linear(channels, 16 * channels, rng, false);
  return p;
}

namespace {
void push(const T64& t, std::vector<T64>& out) {
  if (t.defined()) out.push_back(t);
}
}  // namespace

void collect(const LinearParams<double>& p, std::vector<T64>& out) {
  push(p.weight, out);
  push(p.bias, out);
}
void collect(const LayerNormParams<double>& p, std::vector<T64>& out) {
  push(p.gamma, out);
  push(p.beta, out);
}
void collect(const AttentionParams<double>& p, std::vector<T64>& out) {
  collect(p.qkv, out);
  collect(p.proj, out);
  push(p.relative_bias, out);
}
void collect(const SwinBlockParams<double>& p, std::vector<T64>& out) {
  collect(p.norm1, out);
  collect(p.attn, out);
  collect(p.norm2, out);
  collect(p.fc1, out);
  collect(p.fc2, out);
}
void collect(const SwinBlockPairParams<double>& p, std::vector<T64>& out) {
  collect(p.blocks[0], out);
  collect(p.blocks[1], out);
}
void collect(const PatchEmbedParams<double>& p, std::vector<T64>& out) {
  push(p.weight, out);
  push(p.bias, out);
  collect(p.norm, out);
}
void collect(const PatchMergingParams<double>& p, std::vector<T64>& out) {
  collect(p.norm, out);
  collect(p.reduction, out);
}
void collect(const PatchExpandingParams<double>& p, std::vector<T64>& out) {
  collect(p.expand, out);
  collect(p.norm, out);
}
void collect(const FinalExpandParams<double>& p, std::vector<T64>& out) { collect(p.expand, out); }

std::filesystem::path scratch_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("swinseg_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace swinseg::testing
