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

#include "swinseg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "swinseg/error.hpp"
#include "swinseg/pgm.hpp"
#include "swinseg/rng.hpp"

namespace swinseg {
namespace {

void check_range(const Range& r, double lo, double hi, const char* name) {
  if (!(r.lo <= r.hi) || r.lo < lo || r.hi > hi) {
    throw ValidationError(std::string("PhantomSpec.") + name + " must satisfy " +
                          std::to_string(lo) + " <= lo <= hi <= " + std::to_string(hi));
  }
}

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

void range_from_json(const nlohmann::json& j, const char* key, Range& r) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2) {
    throw ConfigError(std::string("phantom.") + key + " must be a [lo, hi] pair");
  }
  r.lo = a[0].get<double>();
  r.hi = a[1].get<double>();
}

struct Ellipse {
  double cr = 0, cc = 0;  // center (row, col)
  double ar = 1, ac = 1;  // semi-axes along the rotated row/col directions
  double theta = 0;

  bool contains(double r, double c) const {
    const double dr = r - cr, dc = c - cc;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double u = (ct * dr + st * dc) / ar;
    const double v = (-st * dr + ct * dc) / ac;
    return u * u + v * v <= 1.0;
  }

  // Half-extents of the axis-aligned bounding box.
  double extent_rows() const {
    return std::hypot(ar * std::cos(theta), ac * std::sin(theta));
  }
  double extent_cols() const {
    return std::hypot(ar * std::sin(theta), ac * std::cos(theta));
  }
};

struct Geometry {
  Ellipse glands[2];
  Ellipse tumor;
  Side side = Side::left;
};

Ellipse sample_gland(const PhantomSpec& s, Rng& rng, Index half_w, int half) {
  Ellipse e;
  const double h = static_cast<double>(s.height);
  const double w = static_cast<double>(half_w);
  e.cr = rng.uniform(s.gland_center_row.lo, s.gland_center_row.hi) * h;
  e.cc = rng.uniform(s.gland_center_col.lo, s.gland_center_col.hi) * w + half * w;
  e.ar = rng.uniform(s.gland_axis_row.lo, s.gland_axis_row.hi) * h;
  e.ac = rng.uniform(s.gland_axis_col.lo, s.gland_axis_col.hi) * w;
  e.theta = rng.uniform(s.gland_rotation.lo, s.gland_rotation.hi);
  return e;
}

bool fits_in_half(const Ellipse& e, const PhantomSpec& s, Index half_w, int half) {
  const double lo_c = half * static_cast<double>(half_w) + 1.0;
  const double hi_c = (half + 1) * static_cast<double>(half_w) - 2.0;
  return e.cr - e.extent_rows() >= 1.0 && e.cr + e.extent_rows() <= s.height - 2.0 &&
         e.cc - e.extent_cols() >= lo_c && e.cc + e.extent_cols() <= hi_c;
}

// A tumor sharing the gland's orientation with axes scaled by f and its
// center inside the (1 - f)-scaled gland lies inside the gland.
Ellipse sample_tumor(const PhantomSpec& s, const Ellipse& gland, Rng& rng) {
  const double f = rng.uniform(s.tumor_radius_fraction.lo, s.tumor_radius_fraction.hi);
  const double rho = std::sqrt(rng.uniform()) * (1.0 - f);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double u = rho * std::cos(phi) * gland.ar;
  const double v = rho * std::sin(phi) * gland.ac;
  const double ct = std::cos(gland.theta), st = std::sin(gland.theta);
  Ellipse t;
  t.cr = gland.cr + ct * u - st * v;
  t.cc = gland.cc + st * u + ct * v;
  t.ar = f * gland.ar;
  t.ac = f * gland.ac;
  t.theta = gland.theta;
  return t;
}

LabelImage rasterize(const PhantomSpec& s, const Geometry& g) {
  LabelImage label(s.height, s.width, kBackground);
  const Ellipse& host = g.glands[g.side == Side::left ? 0 : 1];
  for (Index r = 0; r < s.height; ++r) {
    for (Index c = 0; c < s.width; ++c) {
      const double y = static_cast<double>(r), x = static_cast<double>(c);
      if (g.glands[0].contains(y, x) || g.glands[1].contains(y, x)) {
        label.at(r, c) = (host.contains(y, x) && g.tumor.contains(y, x)) ? kTumor : kGland;
      }
    }
  }
  return label;
}

Geometry sample_geometry(const PhantomSpec& s, Rng& rng, LabelImage& label) {
  const Index half_w = s.width / 2;
  for (int attempt = 0; attempt < s.max_retries; ++attempt) {
    Geometry g;
    g.side = rng.uniform() < 0.5 ? Side::left : Side::right;
    bool ok = true;
    for (int half = 0; half < 2; ++half) {
      g.glands[half] = sample_gland(s, rng, half_w, half);
      ok = ok && fits_in_half(g.glands[half], s, half_w, half);
    }
    g.tumor = sample_tumor(s, g.glands[g.side == Side::left ? 0 : 1], rng);
    if (!ok) continue;
    label = rasterize(s, g);
    std::size_t gland = 0, tumor = 0;
    const Index c0 = g.side == Side::left ? 0 : half_w;
    for (Index r = 0; r < s.height; ++r) {
      for (Index c = c0; c < c0 + half_w; ++c) {
        gland += label.at(r, c) != kBackground;
        tumor += label.at(r, c) == kTumor;
      }
    }
    if (tumor > 0 && static_cast<double>(tumor) >= s.min_tumor_fraction * gland) return g;
  }
  throw GenerationError("phantom geometry infeasible after " + std::to_string(s.max_retries) +
                        " attempts");
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= total;
  return k;
}

// Separable blur with edge clamping.
void blur(std::vector<double>& img, Index h, Index w, double sigma) {
  if (sigma <= 0) return;
  const auto k = gaussian_kernel(sigma);
  const Index radius = static_cast<Index>(k.size() / 2);
  std::vector<double> tmp(img.size());
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0;
      for (Index i = -radius; i <= radius; ++i) {
        const Index cc = std::clamp<Index>(c + i, 0, w - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * img[static_cast<std::size_t>(r * w + cc)];
      }
      tmp[static_cast<std::size_t>(r * w + c)] = acc;
    }
  }
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0;
      for (Index i = -radius; i <= radius; ++i) {
        const Index rr = std::clamp<Index>(r + i, 0, h - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(rr * w + c)];
      }
      img[static_cast<std::size_t>(r * w + c)] = acc;
    }
  }
}

SliceRecord half_of(const SliceRecord& r, Index c0, Index w, Side side) {
  SliceRecord out;
  out.center = r.center;
  out.side = side;
  for (int m = 0; m < kModalities; ++m) {
    Image img(r.height(), w);
    for (Index y = 0; y < r.height(); ++y) {
      for (Index x = 0; x < w; ++x) img.at(y, x) = r.modalities[m].at(y, c0 + x);
    }
    out.modalities[m] = std::move(img);
  }
  out.label = LabelImage(r.height(), w);
  for (Index y = 0; y < r.height(); ++y) {
    for (Index x = 0; x < w; ++x) out.label.at(y, x) = r.label.at(y, c0 + x);
  }
  return out;
}

template <typename Img>
Img concat_impl(const Img& left, const Img& right) {
  if (left.height != right.height) {
    throw DimensionError("concat_halves: heights differ (" + std::to_string(left.height) +
                         " vs " + std::to_string(right.height) + ")");
  }
  Img out(left.height, left.width + right.width);
  for (Index r = 0; r < left.height; ++r) {
    for (Index c = 0; c < left.width; ++c) out.at(r, c) = left.at(r, c);
    for (Index c = 0; c < right.width; ++c) out.at(r, left.width + c) = right.at(r, c);
  }
  return out;
}

constexpr const char* kModalityNames[kModalities] = {"stir", "t1", "t2"};

}  // namespace

void PhantomSpec::validate() const {
  if (height < 8 || width < 16) throw ValidationError("PhantomSpec: image too small");
  if (width % 2 != 0) throw ValidationError("PhantomSpec: width must be even");
  check_range(gland_center_row, 0.0, 1.0, "gland_center_row");
  check_range(gland_center_col, 0.0, 1.0, "gland_center_col");
  check_range(gland_axis_row, 0.01, 0.5, "gland_axis_row");
  check_range(gland_axis_col, 0.01, 0.5, "gland_axis_col");
  check_range(gland_rotation, -M_PI, M_PI, "gland_rotation");
  check_range(tumor_radius_fraction, 0.01, 0.99, "tumor_radius_fraction");
  if (!(min_tumor_fraction >= 0.0 && min_tumor_fraction < 1.0)) {
    throw ValidationError("PhantomSpec.min_tumor_fraction must lie in [0, 1)");
  }
  for (const auto& row : contrast) {
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("PhantomSpec.contrast outside [0, 1]");
    }
  }
  for (double s : modality_noise) {
    if (!(s >= 0.0)) throw ValidationError("PhantomSpec.modality_noise must be >= 0");
  }
  if (max_retries < 1) throw ValidationError("PhantomSpec.max_retries must be >= 1");
}

void to_json(nlohmann::json& j, const PhantomSpec& s) {
  auto pair = [](const Range& r) { return nlohmann::json::array({r.lo, r.hi}); };
  j = nlohmann::json{{"height", s.height},
                     {"width", s.width},
                     {"gland_center_row", pair(s.gland_center_row)},
                     {"gland_center_col", pair(s.gland_center_col)},
                     {"gland_axis_row", pair(s.gland_axis_row)},
                     {"gland_axis_col", pair(s.gland_axis_col)},
                     {"gland_rotation", pair(s.gland_rotation)},
                     {"tumor_radius_fraction", pair(s.tumor_radius_fraction)},
                     {"min_tumor_fraction", s.min_tumor_fraction},
                     {"contrast", s.contrast},
                     {"modality_noise", s.modality_noise},
                     {"max_retries", s.max_retries}};
}

void from_json(const nlohmann::json& j, PhantomSpec& s) {
  get_if_present(j, "height", s.height);
  get_if_present(j, "width", s.width);
  range_from_json(j, "gland_center_row", s.gland_center_row);
  range_from_json(j, "gland_center_col", s.gland_center_col);
  range_from_json(j, "gland_axis_row", s.gland_axis_row);
  range_from_json(j, "gland_axis_col", s.gland_axis_col);
  range_from_json(j, "gland_rotation", s.gland_rotation);
  range_from_json(j, "tumor_radius_fraction", s.tumor_radius_fraction);
  get_if_present(j, "min_tumor_fraction", s.min_tumor_fraction);
  get_if_present(j, "contrast", s.contrast);
  get_if_present(j, "modality_noise", s.modality_noise);
  get_if_present(j, "max_retries", s.max_retries);
}

CenterProfile CenterProfile::center1() { return CenterProfile{}; }

CenterProfile CenterProfile::center2() {
  CenterProfile c;
  c.id = 2;
  c.noise_sigma = 0.04;
  c.gain = {0.80, 0.80, 1.20};
  c.offset = {0.25, 0.20, -0.25};
  c.blur_sigma = 0.8;
  return c;
}

void CenterProfile::validate() const {
  if (id < 1) throw ValidationError("CenterProfile.id must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ValidationError("CenterProfile.noise_sigma must be >= 0");
  for (double g : gain) {
    if (!(g > 0.0)) throw ValidationError("CenterProfile.gain must be > 0");
  }
  for (double o : offset) {
    if (!std::isfinite(o)) throw ValidationError("CenterProfile.offset must be finite");
  }
  if (!(blur_sigma >= 0.0)) throw ValidationError("CenterProfile.blur_sigma must be >= 0");
}

void to_json(nlohmann::json& j, const CenterProfile& c) {
  j = nlohmann::json{{"id", c.id},         {"noise_sigma", c.noise_sigma},
                     {"gain", c.gain},     {"offset", c.offset},
                     {"blur_sigma", c.blur_sigma}};
}

void from_json(const nlohmann::json& j, CenterProfile& c) {
  get_if_present(j, "id", c.id);
  get_if_present(j, "noise_sigma", c.noise_sigma);
  get_if_present(j, "gain", c.gain);
  get_if_present(j, "offset", c.offset);
  get_if_present(j, "blur_sigma", c.blur_sigma);
}

std::string to_string(Side s) { return s == Side::left ? "left" : "right"; }

Side side_from_string(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw DataError("unknown side '" + s + "' (expected left or right)");
}

SliceRecord generate_slice(const PhantomSpec& spec, const CenterProfile& center,
                           std::uint64_t seed) {
  spec.validate();
  center.validate();
  SliceRecord rec;
  rec.center = center.id;

  Rng geometry_rng(mix_seed(seed, "geometry"));
  const Geometry g = sample_geometry(spec, geometry_rng, rec.label);
  rec.side = g.side;

  Rng noise_rng(mix_seed(seed, "noise"));
  const std::size_t n = static_cast<std::size_t>(spec.height * spec.width);
  for (int m = 0; m < kModalities; ++m) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = spec.contrast[m][rec.label.labels[i]];
    blur(v, spec.height, spec.width, center.blur_sigma);
    const double sigma = std::hypot(center.noise_sigma, spec.modality_noise[m]);
    Image img(spec.height, spec.width);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = center.gain[m] * v[i] + center.offset[m] + sigma * noise_rng.normal();
      img.pixels[i] = quantize_unit16(x);
    }
    rec.modalities[m] = std::move(img);
  }
  return rec;
}

SplitResult split_left_right(const SliceRecord& record) {
  const Index w = record.width();
  if (w % 2 != 0) {
    throw DimensionError("split_left_right: width " + std::to_string(w) + " is odd");
  }
  for (const auto& img : record.modalities) {
    if (img.height != record.height() || img.width != w) {
      throw DimensionError("split_left_right: modality extents differ from the label mask");
    }
  }
  const Index half = w / 2;
  SliceRecord left = half_of(record, 0, half, Side::left);
  SliceRecord right = half_of(record, half, half, Side::right);
  if (record.side == Side::left) return {std::move(left), std::move(right)};
  return {std::move(right), std::move(left)};
}

Image concat_halves(const Image& left, const Image& right) { return concat_impl(left, right); }

LabelImage concat_halves(const LabelImage& left, const LabelImage& right) {
  return concat_impl(left, right);
}

std::size_t DatasetManifest::count(const std::string& split) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const ManifestRecord& r) { return r.split == split; }));
}

void to_json(nlohmann::json& j, const DatasetManifest& m) {
  auto records = nlohmann::json::array();
  for (const auto& r : m.records) {
    records.push_back({{"id", r.id},
                       {"center", r.center},
                       {"side", to_string(r.side)},
                       {"split", r.split},
                       {"paths",
                        {{"stir", r.paths.stir},
                         {"t1", r.paths.t1},
                         {"t2", r.paths.t2},
                         {"label", r.paths.label}}}});
  }
  j = nlohmann::json{{"version", m.version}, {"seed", m.seed}, {"records", records}};
}

void from_json(const nlohmann::json& j, DatasetManifest& m) {
  m.version = j.at("version").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.records.clear();
  for (const auto& e : j.at("records")) {
    ManifestRecord r;
    r.id = e.at("id").get<int>();
    r.center = e.at("center").get<int>();
    r.side = side_from_string(e.at("side").get<std::string>());
    r.split = e.at("split").get<std::string>();
    if (r.split != "train" && r.split != "test") {
      throw DataError("manifest record " + std::to_string(r.id) + ": unknown split '" +
                      r.split + "'");
    }
    const auto& p = e.at("paths");
    r.paths = {p.at("stir").get<std::string>(), p.at("t1").get<std::string>(),
               p.at("t2").get<std::string>(), p.at("label").get<std::string>()};
    m.records.push_back(std::move(r));
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  try {
    return nlohmann::json::parse(in).get<DatasetManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << nlohmann::json(manifest).dump(2) << '\n';
  if (!out) throw DataError("failed writing manifest " + path.string());
}

SlicePaths write_slice(const SliceRecord& record, const std::filesystem::path& dir,
                       const std::string& stem) {
  std::string names[kModalities];
  for (int m = 0; m < kModalities; ++m) {
    names[m] = stem + "_" + kModalityNames[m] + ".pgm";
    write_pgm16(record.modalities[m], dir / names[m]);
  }
  const std::string label = stem + "_label.pgm";
  write_pgm8(record.label, dir / label);
  return {names[0], names[1], names[2], label};
}

SliceRecord read_slice(const SlicePaths& paths, const std::filesystem::path& dir) {
  SliceRecord rec;
  rec.modalities[kStir] = read_pgm16(dir / paths.stir);
  rec.modalities[kT1] = read_pgm16(dir / paths.t1);
  rec.modalities[kT2] = read_pgm16(dir / paths.t2);
  rec.label = read_pgm8(dir / paths.label);
  for (const auto& img : rec.modalities) {
    if (img.height != rec.label.height || img.width != rec.label.width) {
      throw DataError("slice " + (dir / paths.label).string() +
                      ": modality extents differ from the label mask");
    }
  }
  for (std::uint8_t l : rec.label.labels) {
    if (l > kTumor) {
      throw DataError("slice " + (dir / paths.label).string() + ": label value " +
                      std::to_string(l) + " outside {0, 1, 2}");
    }
  }
  return rec;
}

std::size_t center1_count(std::size_t n, double center1_fraction) {
  // The epsilon keeps products like 100 * 0.42 from flooring to 41.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * center1_fraction + 1e-9));
}

DatasetManifest make_dataset(std::size_t n, std::array<double, 2> center_mix,
                             const PhantomSpec& spec,
                             const std::array<CenterProfile, 2>& profiles, std::uint64_t seed,
                             const std::filesystem::path& out_dir) {
  if (n < 10) throw ValidationError("make_dataset: need at least 10 slices, got " + std::to_string(n));
  if (!(center_mix[0] >= 0 && center_mix[1] >= 0) ||
      std::abs(center_mix[0] + center_mix[1] - 1.0) > 1e-9) {
    throw ValidationError("make_dataset: center mix must be two non-negative fractions summing to 1");
  }
  spec.validate();
  for (const auto& p : profiles) p.validate();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::size_t n1 = center1_count(n, center_mix[0]);
  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.records.resize(n);

  // Split each center 80/20 on its own.
  Rng split_rng(mix_seed(seed, "split"));
  const std::size_t begin[2] = {0, n1};
  const std::size_t count[2] = {n1, n - n1};
  for (int c = 0; c < 2; ++c) {
    const auto test_n = static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(count[c])));
    const auto perm = split_rng.permutation(count[c]);
    for (std::size_t k = 0; k < count[c]; ++k) {
      manifest.records[begin[c] + perm[k]].split = k < test_n ? "test" : "train";
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const CenterProfile& profile = profiles[i < n1 ? 0 : 1];
    const SliceRecord rec = generate_slice(spec, profile, mix_seed(seed, static_cast<std::uint64_t>(i)));
    char stem[32];
    std::snprintf(stem, sizeof stem, "slice_%05zu", i);
    ManifestRecord& entry = manifest.records[i];
    entry.id = static_cast<int>(i);
    entry.center = profile.id;
    entry.side = rec.side;
    entry.paths = write_slice(rec, out_dir, stem);
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

std::vector<SliceRecord> load_records(const DatasetManifest& manifest,
                                      const std::filesystem::path& manifest_dir,
                                      const std::string& split) {
  std::vector<SliceRecord> out;
  for (const auto& e : manifest.records) {
    if (!split.empty() && e.split != split) continue;
    SliceRecord rec = read_slice(e.paths, manifest_dir);
    rec.center = e.center;
    rec.side = e.side;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace swinseg
