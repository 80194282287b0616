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

#include "swinseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "swinseg/error.hpp"

namespace swinseg {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  if (per_class.size() != other.per_class.size()) {
    throw ValidationError("cannot pool confusion counts with different class counts");
  }
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    per_class[k].tp += other.per_class[k].tp;
    per_class[k].fp += other.per_class[k].fp;
    per_class[k].tn += other.per_class[k].tn;
    per_class[k].fn += other.per_class[k].fn;
  }
  total += other.total;
  return *this;
}

ConfusionCounts confusion(const LabelImage& pred, const LabelImage& gt, int classes) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw DimensionError("confusion: prediction and ground truth extents differ");
  }
  if (classes < 1) throw ValidationError("confusion: need at least one class");
  // Joint histogram, then one-vs-rest counts from its margins.
  std::vector<std::int64_t> joint(static_cast<std::size_t>(classes * classes), 0);
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const int p = pred.labels[i], g = gt.labels[i];
    if (p >= classes || g >= classes) {
      throw ValidationError("confusion: label " + std::to_string(std::max(p, g)) +
                            " outside [0," + std::to_string(classes) + ")");
    }
    ++joint[static_cast<std::size_t>(p * classes + g)];
  }
  ConfusionCounts c;
  c.total = static_cast<std::int64_t>(pred.labels.size());
  c.per_class.resize(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    std::int64_t predicted = 0, actual = 0;
    for (int j = 0; j < classes; ++j) {
      predicted += joint[static_cast<std::size_t>(k * classes + j)];
      actual += joint[static_cast<std::size_t>(j * classes + k)];
    }
    auto& cc = c.per_class[static_cast<std::size_t>(k)];
    cc.tp = joint[static_cast<std::size_t>(k * classes + k)];
    cc.fp = predicted - cc.tp;
    cc.fn = actual - cc.tp;
    cc.tn = c.total - cc.tp - cc.fp - cc.fn;
  }
  return c;
}

namespace {
const ClassCounts& counts_of(const ConfusionCounts& c, int cls) {
  if (cls < 0 || cls >= static_cast<int>(c.per_class.size())) {
    throw ValidationError("class index out of range");
  }
  return c.per_class[static_cast<std::size_t>(cls)];
}
}  // namespace

double dice(const ConfusionCounts& c, int cls) {
  const auto& k = counts_of(c, cls);
  const std::int64_t denom = k.fp + 2 * k.tp + k.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(2 * k.tp) / static_cast<double>(denom);
}

double mpa(const ConfusionCounts& c, int cls) {
  const auto& k = counts_of(c, cls);
  const std::int64_t denom = k.fn + k.tp + k.fp + k.tn;
  if (denom == 0) return 1.0;
  return static_cast<double>(k.tp + k.tn) / static_cast<double>(denom);
}

double iou(const ConfusionCounts& c, int cls) {
  const auto& k = counts_of(c, cls);
  const std::int64_t denom = k.fn + k.tp + k.fp;
  if (denom == 0) return 1.0;
  return static_cast<double>(k.tp) / static_cast<double>(denom);
}

PointSet class_points(const LabelImage& mask, int cls) {
  PointSet pts;
  for (Index r = 0; r < mask.height; ++r)
    for (Index c = 0; c < mask.width; ++c)
      if (mask.at(r, c) == cls) pts.push_back({r, c});
  return pts;
}

namespace {

// Felzenszwalb-Huttenlocher 1-D squared distance transform of the strided
// sequence at `base`, in place.
void edt_1d(std::size_t n, std::size_t stride, double* base, std::vector<double>& f,
            std::vector<double>& d, std::vector<std::size_t>& v, std::vector<double>& z) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) f[i] = base[i * stride];
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double dq = static_cast<double>(q), dp = static_cast<double>(p);
    return ((f[q] + dq * dq) - (f[p] + dp * dp)) / (2.0 * dq - 2.0 * dp);
  };
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
  for (std::size_t i = 0; i < n; ++i) base[i * stride] = d[i];
}

}  // namespace

double directed_hausdorff(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw ValidationError("directed_hausdorff: empty point set");
  Index rows = 0, cols = 0;
  for (const auto* set : {&a, &b})
    for (const auto& p : *set) {
      if (p.row < 0 || p.col < 0) throw ValidationError("directed_hausdorff: negative coordinate");
      rows = std::max(rows, p.row + 1);
      cols = std::max(cols, p.col + 1);
    }
  // Squared distances on this grid are integers far below 2^53, so the
  // transform is exact.
  const double inf = 1e30;
  std::vector<double> grid(static_cast<std::size_t>(rows * cols), inf);
  for (const auto& p : b) grid[static_cast<std::size_t>(p.row * cols + p.col)] = 0.0;
  const std::size_t n = static_cast<std::size_t>(std::max(rows, cols));
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<std::size_t> v(n);
  for (Index c = 0; c < cols; ++c)
    edt_1d(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), grid.data() + c, f, d, v, z);
  for (Index r = 0; r < rows; ++r)
    edt_1d(static_cast<std::size_t>(cols), 1, grid.data() + r * cols, f, d, v, z);
  double worst = 0;
  for (const auto& p : a) worst = std::max(worst, grid[static_cast<std::size_t>(p.row * cols + p.col)]);
  return std::sqrt(worst);
}

double hausdorff(const PointSet& a, const PointSet& b, Index height, Index width) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) {
    const double h = static_cast<double>(height - 1), w = static_cast<double>(width - 1);
    return std::sqrt(h * h + w * w);
  }
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

std::string AggregationPolicy::tag() const {
  auto name = [](ClassSet s) { return s == ClassSet::all ? "all" : "fg"; };
  std::ostringstream os;
  os << "dsc:" << name(dsc) << ",mpa:" << name(mpa) << ",miou:" << name(miou)
     << ",hd:fg," << (pooled ? "pooled" : "per_slice");
  return os.str();
}

namespace {

double macro(const std::vector<ClassMetrics>& pc, ClassSet set, double ClassMetrics::*field) {
  const std::size_t first = set == ClassSet::all ? 0 : 1;
  if (pc.size() <= first) return 0.0;
  double s = 0;
  for (std::size_t k = first; k < pc.size(); ++k) s += pc[k].*field;
  return s / static_cast<double>(pc.size() - first);
}

void fill_macros(MetricsReport& r, const AggregationPolicy& policy) {
  r.dsc = macro(r.per_class, policy.dsc, &ClassMetrics::dsc);
  r.mpa = macro(r.per_class, policy.mpa, &ClassMetrics::mpa);
  r.miou = macro(r.per_class, policy.miou, &ClassMetrics::miou);
  r.hd = macro(r.per_class, ClassSet::foreground, &ClassMetrics::hd);
  r.policy = policy.tag();
}

}  // namespace

MetricsReport evaluate(const LabelImage& pred, const LabelImage& gt, int classes,
                       const AggregationPolicy& policy) {
  const ConfusionCounts c = confusion(pred, gt, classes);
  MetricsReport r;
  r.per_class.resize(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    auto& m = r.per_class[static_cast<std::size_t>(k)];
    m.dsc = dice(c, k);
    m.mpa = mpa(c, k);
    m.miou = iou(c, k);
    m.hd = hausdorff(class_points(pred, k), class_points(gt, k), gt.height, gt.width);
  }
  fill_macros(r, policy);
  return r;
}

MetricsReport evaluate_dataset(const std::vector<LabelImage>& preds,
                               const std::vector<LabelImage>& gts, int classes,
                               const AggregationPolicy& policy) {
  if (preds.size() != gts.size() || preds.empty()) {
    throw ValidationError("evaluate_dataset: need equally many (non-zero) predictions and labels");
  }
  const double n = static_cast<double>(preds.size());
  MetricsReport out;
  out.per_class.resize(static_cast<std::size_t>(classes));
  std::vector<MetricsReport> slices;
  slices.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    slices.push_back(evaluate(preds[i], gts[i], classes, policy));
  }
  for (const auto& s : slices) {
    for (int k = 0; k < classes; ++k) {
      auto& o = out.per_class[static_cast<std::size_t>(k)];
      const auto& m = s.per_class[static_cast<std::size_t>(k)];
      o.dsc += m.dsc / n;
      o.mpa += m.mpa / n;
      o.miou += m.miou / n;
      o.hd += m.hd / n;
    }
  }
  if (policy.pooled) {
    ConfusionCounts pooled = confusion(preds[0], gts[0], classes);
    for (std::size_t i = 1; i < preds.size(); ++i) pooled += confusion(preds[i], gts[i], classes);
    for (int k = 0; k < classes; ++k) {
      auto& o = out.per_class[static_cast<std::size_t>(k)];
      o.dsc = dice(pooled, k);
      o.mpa = mpa(pooled, k);
      o.miou = iou(pooled, k);
    }
  }
  fill_macros(out, policy);
  return out;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& m = r.per_class[k];
    per.push_back({{"class", k}, {"dsc", m.dsc}, {"mpa", m.mpa}, {"miou", m.miou}, {"hd", m.hd}});
  }
  return {{"dsc", r.dsc}, {"mpa", r.mpa},         {"miou", r.miou},
          {"hd", r.hd},   {"policy", r.policy}, {"per_class", per}};
}

std::string csv_header(const MetricsReport& r) {
  std::ostringstream os;
  os << "dsc,mpa,miou,hd";
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    os << ",dsc_" << k << ",mpa_" << k << ",miou_" << k << ",hd_" << k;
  }
  return os.str();
}

std::string csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.dsc << ',' << r.mpa << ',' << r.miou << ',' << r.hd;
  for (const auto& m : r.per_class) os << ',' << m.dsc << ',' << m.mpa << ',' << m.miou << ',' << m.hd;
  return os.str();
}

}  // namespace swinseg
