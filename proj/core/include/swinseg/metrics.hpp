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

// Overlap and distance metrics for label masks: Dice, pixel accuracy,
// IoU and the Hausdorff distance, with per-class and macro aggregates.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swinseg/image.hpp"

namespace swinseg {

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  bool operator==(const ClassCounts&) const = default;
};

// One-vs-rest tallies; every class sums to `total`.
struct ConfusionCounts {
  std::vector<ClassCounts> per_class;
  std::int64_t total = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& other);
};

ConfusionCounts confusion(const LabelImage& pred, const LabelImage& gt, int classes);

// 2TP / (FP + 2TP + FN); 1.0 when the class is absent and not predicted.
double dice(const ConfusionCounts& c, int cls);
// (TP + TN) / total.
double mpa(const ConfusionCounts& c, int cls);
// TP / (FN + TP + FP); 1.0 when the class is absent and not predicted.
double iou(const ConfusionCounts& c, int cls);

struct Point {
  Index row = 0;
  Index col = 0;
  bool operator==(const Point&) const = default;
};
using PointSet = std::vector<Point>;

PointSet class_points(const LabelImage& mask, int cls);

// max_{a in A} min_{b in B} |a - b|. A and B must be non-empty with
// non-negative coordinates. Uses an exact squared Euclidean distance
// transform of B, so results match pairwise evaluation bit-for-bit.
double directed_hausdorff(const PointSet& a, const PointSet& b);

// max(h(A,B), h(B,A)). Both empty -> 0; exactly one empty -> the diagonal
// of the (height x width) image, sqrt((h-1)^2 + (w-1)^2).
double hausdorff(const PointSet& a, const PointSet& b, Index height, Index width);

enum class ClassSet { all, foreground };

struct AggregationPolicy {
  ClassSet dsc = ClassSet::foreground;
  ClassSet mpa = ClassSet::all;
  ClassSet miou = ClassSet::all;
  // Dataset level: false averages per-slice reports, true pools the
  // confusion counts of all slices first. HD is per-slice averaged either way.
  bool pooled = false;

  std::string tag() const;
};

struct ClassMetrics {
  double dsc = 0;
  double mpa = 0;
  double miou = 0;
  double hd = 0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double dsc = 0;
  double mpa = 0;
  double miou = 0;
  double hd = 0;  // macro over foreground classes, in pixels
  std::string policy;
};

// Single-slice report. HD is computed over the full pixel set of each class.
MetricsReport evaluate(const LabelImage& pred, const LabelImage& gt, int classes,
                       const AggregationPolicy& policy = {});

// Multi-slice report following policy.pooled.
MetricsReport evaluate_dataset(const std::vector<LabelImage>& preds,
                               const std::vector<LabelImage>& gts, int classes,
                               const AggregationPolicy& policy = {});

nlohmann::json to_json(const MetricsReport& r);
std::string csv_header(const MetricsReport& r);
std::string csv_row(const MetricsReport& r);

}  // namespace swinseg
