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

#include <cmath>

#include "swinseg/error.hpp"
#include "swinseg/model.hpp"
#include "swinseg/rng.hpp"

namespace swinseg {

template <typename T>
typename UNetBaseline<T>::Conv UNetBaseline<T>::make_conv(const std::string& name, Index k,
                                                          Index cin, Index cout,
                                                          std::uint64_t seed) {
  // He-normal fan-in init for the ReLU stack.
  Rng rng(mix_seed(seed, name + ".weight"));
  const double stddev = std::sqrt(2.0 / static_cast<double>(k * k * cin));
  std::vector<T> w(static_cast<std::size_t>(k * k * cin * cout));
  for (auto& v : w) v = static_cast<T>(rng.normal() * stddev);
  Conv c;
  c.weight = Tensor<T>::from_data({k, k, cin, cout}, std::move(w), true);
  c.bias = Tensor<T>::zeros({cout}, true);
  named_.add(name + ".weight", c.weight);
  named_.add(name + ".bias", c.bias);
  return c;
}

template <typename T>
UNetBaseline<T>::UNetBaseline(UNetBaselineConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  Index cin = c.in_channels;
  for (int l = 0; l < c.depth; ++l) {
    const std::string p = "encoder.level" + std::to_string(l);
    const Index ch = c.base_channels << l;
    Level lv;
    lv.conv1 = make_conv(p + ".conv1", 3, cin, ch, seed);
    lv.conv2 = make_conv(p + ".conv2", 3, ch, ch, seed);
    down_.push_back(lv);
    cin = ch;
  }
  const Index bottom = c.base_channels << c.depth;
  bottom_.conv1 = make_conv("encoder.bottleneck.conv1", 3, cin, bottom, seed);
  bottom_.conv2 = make_conv("encoder.bottleneck.conv2", 3, bottom, bottom, seed);
  up_.resize(static_cast<std::size_t>(c.depth));
  for (int l = c.depth - 1; l >= 0; --l) {
    const std::string p = "decoder.level" + std::to_string(l);
    const Index ch = c.base_channels << l;
    up_[l].up = make_conv(p + ".up", 3, 2 * ch, ch, seed);
    up_[l].conv1 = make_conv(p + ".conv1", 3, 2 * ch, ch, seed);
    up_[l].conv2 = make_conv(p + ".conv2", 3, ch, ch, seed);
  }
  head_ = make_conv("head.classifier", 1, c.base_channels, c.classes, seed);
}

template <typename T>
Tensor<T> UNetBaseline<T>::forward(const Tensor<T>& image) const {
  const auto& c = config_;
  if (image.rank() != 4 || image.dim(1) != c.height || image.dim(2) != c.width ||
      image.dim(3) != c.in_channels) {
    throw DimensionError("UNetBaseline: image " + to_string(image.shape()) +
                         " does not match config");
  }
  auto conv_relu = [](const Tensor<T>& x, const Conv& k) {
    return relu(conv2d(x, k.weight, k.bias, 1, 1));
  };
  std::vector<Tensor<T>> skips;
  Tensor<T> x = image;
  for (const auto& lv : down_) {
    x = conv_relu(conv_relu(x, lv.conv1), lv.conv2);
    skips.push_back(x);
    x = max_pool2x2(x);
  }
  x = conv_relu(conv_relu(x, bottom_.conv1), bottom_.conv2);
  for (int l = c.depth - 1; l >= 0; --l) {
    const auto& u = up_[l];
    x = conv_relu(upsample_nearest2x(x), u.up);
    x = concat_last(x, skips[l]);
    x = conv_relu(conv_relu(x, u.conv1), u.conv2);
  }
  return conv2d(x, head_.weight, head_.bias, 1, 0);
}

template <typename T>
nlohmann::json UNetBaseline<T>::config_json() const {
  return config_;
}

template class UNetBaseline<float>;
template class UNetBaseline<double>;

}  // namespace swinseg
