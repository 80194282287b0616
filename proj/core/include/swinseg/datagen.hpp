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

// Synthetic multimodal "parotid" phantoms: a gland ellipse in each half of
// the slice, a tumor ellipse nested inside exactly one of them, rendered in
// three complementary contrasts and perturbed by a per-center acquisition
// profile.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swinseg/image.hpp"

namespace swinseg {

inline constexpr int kModalities = 3;  // STIR-like, T1-like, T2-like
inline constexpr int kStir = 0;
inline constexpr int kT1 = 1;
inline constexpr int kT2 = 2;

inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kGland = 1;
inline constexpr std::uint8_t kTumor = 2;

struct Range {
  double lo = 0;
  double hi = 0;
};

struct PhantomSpec {
  Index height = 64;
  Index width = 128;  // full slice; each half holds one gland

  // Gland geometry, as fractions of the half-slice extents.
  Range gland_center_row{0.40, 0.60};
  Range gland_center_col{0.40, 0.60};
  Range gland_axis_row{0.24, 0.34};
  Range gland_axis_col{0.22, 0.32};
  Range gland_rotation{-0.6, 0.6};  // radians
  // Tumor semi-axes as fractions of the gland semi-axes.
  Range tumor_radius_fraction{0.40, 0.60};
  // Smallest accepted tumor, as a fraction of the gland area.
  double min_tumor_fraction = 0.10;

  // contrast[modality][tissue] with tissue = background, gland, tumor.
  // Tumor/gland contrast lives only in STIR, gland/background contrast in
  // T1 (strong) and T2 (weak, noisier).
  std::array<std::array<double, 3>, kModalities> contrast{{
      {0.25, 0.25, 0.80},
      {0.20, 0.70, 0.70},
      {0.35, 0.50, 0.50},
  }};
  // Extra per-modality noise on top of the center's noise.
  std::array<double, kModalities> modality_noise{0.0, 0.0, 0.06};

  int max_retries = 64;

  void validate() const;
};

void to_json(nlohmann::json& j, const PhantomSpec& s);
void from_json(const nlohmann::json& j, PhantomSpec& s);

// Acquisition differences between imaging sites.
struct CenterProfile {
  int id = 1;
  double noise_sigma = 0.03;
  std::array<double, kModalities> gain{1.0, 1.0, 1.0};
  std::array<double, kModalities> offset{0.0, 0.0, 0.0};
  double blur_sigma = 0.0;  // Gaussian blur in pixels, 0 disables

  static CenterProfile center1();
  static CenterProfile center2();
  void validate() const;
};

void to_json(nlohmann::json& j, const CenterProfile& c);
void from_json(const nlohmann::json& j, CenterProfile& c);

enum class Side { left, right };
std::string to_string(Side s);
Side side_from_string(const std::string& s);

struct SliceRecord {
  std::array<Image, kModalities> modalities;  // STIR, T1, T2
  LabelImage label;
  int center = 1;
  Side side = Side::left;  // side of the tumor

  Index height() const { return label.height; }
  Index width() const { return label.width; }
  bool operator==(const SliceRecord&) const = default;
};

// Pure function of its arguments. Pixel values lie on the 16-bit grid, so
// a PGM round trip reproduces them exactly.
SliceRecord generate_slice(const PhantomSpec& spec, const CenterProfile& center,
                           std::uint64_t seed);

struct SplitResult {
  SliceRecord kept;       // the tumor side
  SliceRecord discarded;  // the other half
};

// Splits a full slice down the middle. Throws DimensionError on odd width.
SplitResult split_left_right(const SliceRecord& record);

// Inverse of the split for images and masks.
Image concat_halves(const Image& left, const Image& right);
LabelImage concat_halves(const LabelImage& left, const LabelImage& right);

struct SlicePaths {
  std::string stir;
  std::string t1;
  std::string t2;
  std::string label;
};

struct ManifestRecord {
  int id = 0;
  int center = 1;
  Side side = Side::left;
  std::string split;  // "train" or "test"
  SlicePaths paths;   // relative to the manifest's directory
};

struct DatasetManifest {
  int version = 1;
  std::uint64_t seed = 0;
  std::vector<ManifestRecord> records;

  std::size_t count(const std::string& split) const;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Writes the four PGM files of a record as <dir>/<stem>_{stir,t1,t2,label}.pgm
// and returns their file names.
SlicePaths write_slice(const SliceRecord& record, const std::filesystem::path& dir,
                       const std::string& stem);
// Reads a record back; center/side are not stored in the images.
SliceRecord read_slice(const SlicePaths& paths, const std::filesystem::path& dir);

// Number of center-1 records for `n` slices and a center-1 fraction:
// floor(n * fraction); the remainder goes to center 2.
std::size_t center1_count(std::size_t n, double center1_fraction);

// Generates n slices (n >= 10), writes them and <out_dir>/manifest.json.
// Each center is split 80/20 on its own so both centers appear in both
// splits whenever both are present. Slice i uses seed mix_seed(seed, i).
DatasetManifest make_dataset(std::size_t n, std::array<double, 2> center_mix,
                             const PhantomSpec& spec,
                             const std::array<CenterProfile, 2>& profiles, std::uint64_t seed,
                             const std::filesystem::path& out_dir);

// Loads every record of the manifest whose split matches ("" for all).
std::vector<SliceRecord> load_records(const DatasetManifest& manifest,
                                      const std::filesystem::path& manifest_dir,
                                      const std::string& split);

}  // namespace swinseg
