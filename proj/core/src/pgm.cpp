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

#include "swinseg/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "swinseg/error.hpp"

namespace swinseg {
namespace {

struct Header {
  Index width = 0;
  Index height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
  std::size_t maxval_offset = 0;
};

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') {
      throw ParseError("not a binary PGM (expected magic P5)", 0);
    }
    pos_ = 2;
  }

  long long number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    last_start_ = start;
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000) throw ParseError(std::string("PGM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM header: expected ") + what, start);
    return v;
  }

  std::size_t finish() {
    // Exactly one whitespace byte separates maxval from the raster.
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("PGM header: missing whitespace before raster", pos_);
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;

 public:
  std::size_t last_start() const { return last_start_; }

 private:
  std::size_t last_start_ = 0;
};

Header parse_header(std::string_view bytes) {
  HeaderReader r(bytes);
  r.expect_magic();
  Header h;
  h.width = r.number("width");
  if (h.width <= 0) throw ParseError("PGM width must be positive", r.last_start());
  h.height = r.number("height");
  if (h.height <= 0) throw ParseError("PGM height must be positive", r.last_start());
  const long long maxval = r.number("maxval");
  h.maxval_offset = r.last_start();
  if (maxval <= 0 || maxval > 65535) throw ParseError("PGM maxval out of range", h.maxval_offset);
  h.maxval = static_cast<int>(maxval);
  h.data_offset = r.finish();
  const std::size_t sample = h.maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(h.width * h.height) * sample;
  if (bytes.size() - h.data_offset < need) {
    throw ParseError("PGM raster truncated: need " + std::to_string(need) + " bytes", bytes.size());
  }
  return h;
}

std::string header_text(Index width, Index height, int maxval) {
  return "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" +
         std::to_string(maxval) + "\n";
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::string& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

float quantize_unit16(double value) {
  const double q = std::round(std::clamp(value, 0.0, 1.0) * 65535.0);
  return static_cast<float>(q / 65535.0);
}

std::string encode_pgm16(const Image& image) {
  std::string out = header_text(image.width, image.height, 65535);
  out.reserve(out.size() + image.pixels.size() * 2);
  for (float v : image.pixels) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 65535.0));
    out.push_back(static_cast<char>((q >> 8) & 0xFF));
    out.push_back(static_cast<char>(q & 0xFF));
  }
  return out;
}

std::string encode_pgm8(const LabelImage& labels) {
  std::string out = header_text(labels.width, labels.height, 255);
  out.append(labels.labels.begin(), labels.labels.end());
  return out;
}

Image decode_pgm16(std::string_view bytes) {
  const Header h = parse_header(bytes);
  Image img(h.height, h.width);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + h.data_offset;
  const double maxval = static_cast<double>(h.maxval);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    unsigned q = 0;
    if (h.maxval > 255) {
      q = (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
    } else {
      q = p[i];
    }
    if (q > static_cast<unsigned>(h.maxval)) {
      throw ParseError("PGM sample exceeds maxval", h.data_offset + (h.maxval > 255 ? 2 * i : i));
    }
    img.pixels[i] = static_cast<float>(q / maxval);
  }
  return img;
}

LabelImage decode_pgm8(std::string_view bytes) {
  const Header h = parse_header(bytes);
  if (h.maxval > 255) throw ParseError("label PGM must use 8-bit samples", h.maxval_offset);
  LabelImage lab(h.height, h.width);
  std::copy_n(bytes.data() + h.data_offset, lab.labels.size(),
              reinterpret_cast<char*>(lab.labels.data()));
  return lab;
}

void write_pgm16(const Image& image, const std::filesystem::path& path) {
  spill(encode_pgm16(image), path);
}

void write_pgm8(const LabelImage& labels, const std::filesystem::path& path) {
  spill(encode_pgm8(labels), path);
}

Image read_pgm16(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  try {
    return decode_pgm16(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

LabelImage read_pgm8(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  try {
    return decode_pgm8(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

}  // namespace swinseg
