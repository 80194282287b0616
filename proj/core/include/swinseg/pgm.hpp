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

// Binary PGM (P5). Intensity images use maxval 65535 with big-endian
// 16-bit samples; label masks use maxval 255 with raw label values.

#include <filesystem>
#include <string>
#include <string_view>

#include "swinseg/image.hpp"

namespace swinseg {

// Nearest point of the 16-bit grid k / 65535 after clamping to [0, 1].
float quantize_unit16(double value);

std::string encode_pgm16(const Image& image);
std::string encode_pgm8(const LabelImage& labels);

// Throw ParseError carrying the byte offset of the first bad token.
Image decode_pgm16(std::string_view bytes);
LabelImage decode_pgm8(std::string_view bytes);

void write_pgm16(const Image& image, const std::filesystem::path& path);
void write_pgm8(const LabelImage& labels, const std::filesystem::path& path);
Image read_pgm16(const std::filesystem::path& path);
LabelImage read_pgm8(const std::filesystem::path& path);

}  // namespace swinseg
