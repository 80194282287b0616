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

#include <benchmark/benchmark.h>

#include "swinseg/metrics.hpp"
#include "swinseg/model.hpp"
#include "swinseg/ops.hpp"
#include "swinseg/optim.hpp"
#include "swinseg/rng.hpp"
#include "swinseg/swin.hpp"

namespace {

using swinseg::Index;
using swinseg::Rng;
using F = swinseg::Tensor<float>;

F random(swinseg::Shape shape, Rng& rng, bool grad = false) {
  std::vector<float> v(static_cast<std::size_t>(swinseg::numel(shape)));
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return F::from_data(std::move(shape), std::move(v), grad);
}

void BM_Matmul(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(1);
  auto a = random({n, n}, rng), b = random({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(swinseg::matmul(a, b).vec().data());
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);

void BM_WindowAttention(benchmark::State& state) {
  const Index c = state.range(0);
  Rng rng(2);
  swinseg::AttentionParams<float> p;
  p.heads = static_cast<int>(c / 16);
  p.qkv = {random({c, 3 * c}, rng), F::zeros({3 * c})};
  p.proj = {random({c, c}, rng), F::zeros({c})};
  p.relative_bias = random({49, p.heads}, rng);  // (2M-1)^2 rows for M=4
  auto x = random({16, 16, c}, rng);               // the 16 windows of a 16x16 map
  swinseg::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(swinseg::window_attention(x, p, F{}).vec().data());
}
BENCHMARK(BM_WindowAttention)->Arg(48)->Arg(96);

void BM_DeskForward(benchmark::State& state) {
  swinseg::SwinUnet<float> net(swinseg::SwinUnetConfig::desk(), 1);
  Rng rng(3);
  auto x = random({state.range(0), 64, 64, 3}, rng);
  swinseg::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x).vec().data());
}
BENCHMARK(BM_DeskForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DeskTrainStep(benchmark::State& state) {
  swinseg::SwinUnet<float> net(swinseg::SwinUnetConfig::desk(), 1);
  auto opt = swinseg::OptimizerState<float>::init(net.parameters(), {});
  Rng rng(4);
  auto x = random({8, 64, 64, 3}, rng);
  std::vector<std::int32_t> labels(8 * 64 * 64);
  for (auto& l : labels) l = static_cast<std::int32_t>(rng.uniform_int(0, 2));
  for (auto _ : state) {
    net.parameters().zero_grad();
    auto loss = swinseg::cross_entropy_loss(net.forward(x), std::span<const std::int32_t>(labels));
    loss.backward();
    swinseg::adamw_step(net.parameters(), opt);
  }
}
BENCHMARK(BM_DeskTrainStep)->Unit(benchmark::kMillisecond);

void BM_Hausdorff(benchmark::State& state) {
  const Index n = state.range(0);
  swinseg::LabelImage a(n, n, 0), b(n, n, 0);
  for (Index r = n / 4; r < 3 * n / 4; ++r) {
    for (Index c = n / 4; c < 3 * n / 4; ++c) a.at(r, c) = 1;
  }
  for (Index r = n / 3; r < 2 * n / 3; ++r) {
    for (Index c = n / 5; c < 4 * n / 5; ++c) b.at(r, c) = 1;
  }
  const auto pa = swinseg::class_points(a, 1), pb = swinseg::class_points(b, 1);
  for (auto _ : state) benchmark::DoNotOptimize(swinseg::hausdorff(pa, pb, n, n));
}
BENCHMARK(BM_Hausdorff)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
