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

#include <cstdint>
#include <vector>

#include "swinseg/tensor.hpp"

namespace swinseg {

// Single-channel intensity image, row-major, values in [0, 1].
struct Image {
  Index height = 0;
  Index width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(Index h, Index w, float fill = 0.0f)
      : height(h), width(w), pixels(static_cast<std::size_t>(h * w), fill) {}

  float& at(Index r, Index c) { return pixels[static_cast<std::size_t>(r * width + c)]; }
  float at(Index r, Index c) const { return pixels[static_cast<std::size_t>(r * width + c)]; }
  bool operator==(const Image&) const = default;
};

// Integer label mask, row-major.
struct LabelImage {
  Index height = 0;
  Index width = 0;
  std::vector<std::uint8_t> labels;

  LabelImage() = default;
  LabelImage(Index h, Index w, std::uint8_t fill = 0)
      : height(h), width(w), labels(static_cast<std::size_t>(h * w), fill) {}

  std::uint8_t& at(Index r, Index c) { return labels[static_cast<std::size_t>(r * width + c)]; }
  std::uint8_t at(Index r, Index c) const {
    return labels[static_cast<std::size_t>(r * width + c)];
  }
  bool operator==(const LabelImage&) const = default;
};

}  // namespace swinseg
