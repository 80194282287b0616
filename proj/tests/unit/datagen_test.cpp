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

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "swinseg/datagen.hpp"
#include "swinseg/error.hpp"
#include "swinseg/pgm.hpp"
#include "swinseg/rng.hpp"

namespace swinseg {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Moments {
  double mean = 0;
  std::size_t n = 0;
};

Moments mean_where(const Image& img, const LabelImage& lab, std::uint8_t cls) {
  Moments m;
  for (std::size_t i = 0; i < lab.labels.size(); ++i) {
    if (lab.labels[i] == cls) {
      m.mean += img.pixels[i];
      ++m.n;
    }
  }
  if (m.n) m.mean /= static_cast<double>(m.n);
  return m;
}

TEST(GenerateSlice, DeterministicForFixedInputs) {
  const PhantomSpec spec;
  for (std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
    EXPECT_EQ(generate_slice(spec, CenterProfile::center2(), seed),
              generate_slice(spec, CenterProfile::center2(), seed));
  }
  EXPECT_NE(generate_slice(spec, CenterProfile::center1(), 1).label,
            generate_slice(spec, CenterProfile::center1(), 2).label);
}

TEST(GenerateSlice, AllThreeClassesAndOneTumorSide) {
  const PhantomSpec spec;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto r = generate_slice(spec, CenterProfile::center1(), mix_seed(5, seed));
    ASSERT_EQ(r.height(), spec.height);
    ASSERT_EQ(r.width(), spec.width);
    std::array<std::size_t, 3> hist{};
    std::array<std::size_t, 2> gland_by_half{}, tumor_by_half{};
    for (Index row = 0; row < r.height(); ++row) {
      for (Index col = 0; col < r.width(); ++col) {
        const auto v = r.label.at(row, col);
        ASSERT_LE(v, kTumor);
        ++hist[v];
        const std::size_t half = col < r.width() / 2 ? 0 : 1;
        if (v == kGland) ++gland_by_half[half];
        if (v == kTumor) ++tumor_by_half[half];
      }
    }
    for (auto h : hist) EXPECT_GT(h, 0u) << "seed " << seed;
    EXPECT_GT(gland_by_half[0], 0u);
    EXPECT_GT(gland_by_half[1], 0u);
    const std::size_t tumor_half = r.side == Side::left ? 0 : 1;
    EXPECT_GT(tumor_by_half[tumor_half], 0u);
    EXPECT_EQ(tumor_by_half[1 - tumor_half], 0u);
    // Tumor area lower bound against its own gland.
    EXPECT_GE(static_cast<double>(tumor_by_half[tumor_half]),
              0.5 * spec.min_tumor_fraction *
                  static_cast<double>(tumor_by_half[tumor_half] + gland_by_half[tumor_half]));
    for (const auto& img : r.modalities) {
      for (float v : img.pixels) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
        ASSERT_EQ(quantize_unit16(v), v);
      }
    }
  }
}

TEST(GenerateSlice, TumorContrastLivesInStirOnly) {
  // Ideal observer at the tumor boundary: mean tumor minus mean gland per
  // channel, against the standard error of that difference. Holding STIR at
  // its mean leaves only T1/T2, whose contrast must sit at the noise floor.
  const PhantomSpec spec;
  const auto center = CenterProfile::center1();
  double stir_z = 1e300, other_z = 0;
  double t1_gland_bg = 1e300, stir_gland_bg = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = generate_slice(spec, center, mix_seed(9, seed));
    for (int m = 0; m < kModalities; ++m) {
      const auto tumor = mean_where(r.modalities[m], r.label, kTumor);
      const auto gland = mean_where(r.modalities[m], r.label, kGland);
      const auto bg = mean_where(r.modalities[m], r.label, kBackground);
      const double sigma = std::hypot(center.noise_sigma, spec.modality_noise[m]);
      const double se = sigma * std::sqrt(1.0 / static_cast<double>(tumor.n) +
                                          1.0 / static_cast<double>(gland.n));
      const double z = std::abs(tumor.mean - gland.mean) / se;
      if (m == kStir) {
        stir_z = std::min(stir_z, z);
        stir_gland_bg = std::max(stir_gland_bg, std::abs(gland.mean - bg.mean));
      } else {
        other_z = std::max(other_z, z);
      }
      if (m == kT1) t1_gland_bg = std::min(t1_gland_bg, std::abs(gland.mean - bg.mean));
    }
  }
  EXPECT_GT(stir_z, 50.0);
  EXPECT_LT(other_z, 4.5);
  EXPECT_GT(t1_gland_bg, 10 * center.noise_sigma);
  EXPECT_LT(stir_gland_bg, 3 * center.noise_sigma);
}

TEST(GenerateSlice, CentersAreSeparable) {
  const PhantomSpec spec;
  const auto c1 = CenterProfile::center1();
  const auto c2 = CenterProfile::center2();
  const double sigma = std::max(c1.noise_sigma, c2.noise_sigma);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = generate_slice(spec, c1, seed);
    const auto b = generate_slice(spec, c2, seed);
    ASSERT_EQ(a.label, b.label);  // same geometry
    for (int m = 0; m < kModalities; ++m) {
      double diff = 0;
      for (std::size_t i = 0; i < a.label.labels.size(); ++i) {
        diff += b.modalities[m].pixels[i] - a.modalities[m].pixels[i];
      }
      diff /= static_cast<double>(a.label.labels.size());
      EXPECT_GT(std::abs(diff), 3 * sigma) << "modality " << m;
    }
  }
}

TEST(GenerateSlice, InfeasibleGeometryIsGenerationError) {
  PhantomSpec spec;
  spec.tumor_radius_fraction = {0.2, 0.3};
  spec.min_tumor_fraction = 0.5;
  spec.max_retries = 4;
  EXPECT_THROW(generate_slice(spec, CenterProfile::center1(), 1), GenerationError);
}

TEST(GenerateSlice, SpecAndProfileValidation) {
  PhantomSpec spec;
  spec.contrast[0][2] = 1.5;
  EXPECT_THROW(spec.validate(), ValidationError);
  spec = {};
  spec.width = 127;
  EXPECT_THROW(spec.validate(), ValidationError);
  auto c = CenterProfile::center2();
  c.gain[1] = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = CenterProfile::center1();
  c.noise_sigma = -0.1;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Split, KeepsTumorHalfAndInverts) {
  const PhantomSpec spec;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = generate_slice(spec, CenterProfile::center2(), seed);
    const auto s = split_left_right(r);
    EXPECT_EQ(s.kept.width(), r.width() / 2);
    EXPECT_EQ(s.discarded.width(), r.width() / 2);
    EXPECT_EQ(s.kept.side, r.side);
    std::size_t tumor_full = 0, tumor_kept = 0;
    for (auto v : r.label.labels) tumor_full += v == kTumor;
    for (auto v : s.kept.label.labels) tumor_kept += v == kTumor;
    EXPECT_EQ(tumor_kept, tumor_full);
    const auto& left = r.side == Side::left ? s.kept : s.discarded;
    const auto& right = r.side == Side::left ? s.discarded : s.kept;
    EXPECT_EQ(concat_halves(left.label, right.label), r.label);
    for (int m = 0; m < kModalities; ++m) {
      EXPECT_EQ(concat_halves(left.modalities[m], right.modalities[m]), r.modalities[m]);
    }
  }
}

TEST(Split, OddWidthIsDimensionError) {
  SliceRecord r;
  r.label = LabelImage(4, 5);
  for (auto& m : r.modalities) m = Image(4, 5);
  EXPECT_THROW(split_left_right(r), DimensionError);
}

TEST(Dataset, CenterRoundingRule) {
  EXPECT_EQ(center1_count(100, 0.42), 42u);
  EXPECT_EQ(center1_count(250, 0.42), 105u);
  EXPECT_EQ(center1_count(7, 0.5), 3u);
  EXPECT_EQ(center1_count(10, 1.0), 10u);
}

TEST(Dataset, HundredSlicesSplitAndRegenerate) {
  const auto dir = testing::scratch_dir("dataset");
  const PhantomSpec spec;
  const std::array<CenterProfile, 2> centers{CenterProfile::center1(), CenterProfile::center2()};
  const auto m = make_dataset(100, {0.42, 0.58}, spec, centers, 2024, dir / "a");
  ASSERT_EQ(m.records.size(), 100u);
  EXPECT_EQ(m.count("train"), 80u);
  EXPECT_EQ(m.count("test"), 20u);

  std::size_t c1 = 0;
  std::set<std::pair<int, std::string>> center_split;
  std::set<int> ids;
  for (const auto& r : m.records) {
    c1 += r.center == 1;
    center_split.insert({r.center, r.split});
    EXPECT_TRUE(ids.insert(r.id).second) << "duplicate id " << r.id;
    for (const auto& p : {r.paths.stir, r.paths.t1, r.paths.t2, r.paths.label}) {
      EXPECT_TRUE(fs::exists(dir / "a" / p)) << p;
    }
  }
  EXPECT_EQ(c1, 42u);
  EXPECT_EQ(center_split.size(), 4u);

  const auto manifest = read_manifest(dir / "a" / "manifest.json");
  EXPECT_EQ(manifest.seed, 2024u);
  make_dataset(100, {0.42, 0.58}, spec, centers, manifest.seed, dir / "b");
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / name)) << name;
  }

  // Records read back carry the manifest's center and side.
  const auto test = load_records(manifest, dir / "a", "test");
  ASSERT_EQ(test.size(), 20u);
  std::size_t k = 0;
  for (const auto& r : manifest.records) {
    if (r.split != "test") continue;
    EXPECT_EQ(test[k].center, r.center);
    EXPECT_EQ(test[k].side, r.side);
    ++k;
  }
}

TEST(Dataset, PreconditionsAreValidated) {
  const auto dir = testing::scratch_dir("dataset_bad");
  const std::array<CenterProfile, 2> centers{CenterProfile::center1(), CenterProfile::center2()};
  EXPECT_THROW(make_dataset(9, {0.5, 0.5}, {}, centers, 1, dir), ValidationError);
  EXPECT_THROW(make_dataset(20, {0.5, 0.6}, {}, centers, 1, dir), ValidationError);
}

TEST(SliceIo, RoundTripAndCorruption) {
  const auto dir = testing::scratch_dir("slice_io");
  const auto r = generate_slice(PhantomSpec{}, CenterProfile::center2(), 31);
  const auto paths = write_slice(r, dir, "s");
  auto back = read_slice(paths, dir);
  back.center = r.center;
  back.side = r.side;
  EXPECT_EQ(back, r);

  // Corrupt the label maxval token.
  std::string bytes = slurp(dir / paths.label);
  const auto pos = bytes.find("255");
  bytes.replace(pos, 3, "000");
  std::ofstream(dir / paths.label, std::ios::binary) << bytes;
  try {
    read_slice(paths, dir);
    ADD_FAILURE() << "corrupt label accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), pos);
  }

  // Out-of-range label values.
  LabelImage bad = r.label;
  bad.labels[0] = 3;
  write_pgm8(bad, dir / paths.label);
  EXPECT_THROW(read_slice(paths, dir), DataError);
}

TEST(Manifest, JsonFieldsAndUnknownSplit) {
  DatasetManifest m;
  m.seed = 5;
  m.records.push_back({3, 2, Side::right, "test", {"a", "b", "c", "d"}});
  const nlohmann::json j = m;
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("records")[0].at("side"), "right");
  EXPECT_EQ(j.at("records")[0].at("paths").at("label"), "d");
  EXPECT_EQ(j.get<DatasetManifest>().records[0].center, 2);
  auto broken = j;
  broken["records"][0]["split"] = "val";
  EXPECT_THROW(broken.get<DatasetManifest>(), DataError);
}

}  // namespace
}  // namespace swinseg
