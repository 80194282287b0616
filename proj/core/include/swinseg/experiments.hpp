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

// Comparison experiments over shared, memoized training runs, and the
// table writer used for all of their output.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swinseg/trainer.hpp"

namespace swinseg {

struct TextTable {
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const TextTable& t);
// Columns padded to their widest cell; numbers right-aligned.
std::string to_text(const TextTable& t);
// Writes <dir>/<stem>.csv and <dir>/<stem>.txt.
void write_table(const TextTable& t, const std::filesystem::path& dir, const std::string& stem);

struct ResultRow {
  std::string label;
  MetricsReport metrics;
};

// Four-metric comparison table. DSC, MPA and MIoU print as percentages,
// HD in pixels.
struct ResultTable {
  std::string title;
  std::string key;  // header of the label column
  std::vector<ResultRow> rows;

  TextTable text() const;
  const ResultRow& row(const std::string& label) const;
};

nlohmann::json to_json(const ResultTable& t);

// Per-stage attention cost of a Swin-Unet configuration: global MSA
// against window MSA at each encoder stage and the bottleneck.
TextTable complexity_table(const SwinUnetConfig& config);

struct ExperimentOptions {
  std::filesystem::path work_dir;  // datasets and run logs go here
  std::function<void(const std::string&)> log;
};

class ExperimentSuite {
 public:
  ExperimentSuite(TrainConfig base, ExperimentOptions options);
  ~ExperimentSuite();

  // Rows: STIR, T1, T2 replicated, then the stacked input.
  ResultTable ablate_channels();
  // Rows: random init, pretext transfer.
  ResultTable ablate_transfer();
  // Rows: mixed, 1->1, 1->2, 2->1, 2->2 (train center -> test center).
  ResultTable ablate_centers();
  // Rows: U-Net baseline, Swin-Unet.
  ResultTable compare_baseline();

  // The shared reference run: base config on the mixed dataset.
  const RunLog& base_run();
  const PretextResult& pretext();

  // Every reported number (losses and metrics of all runs so far), without
  // wall-clock times.
  nlohmann::json summary() const;

 private:
  struct Run;

  const SplitData& dataset(const std::string& name);
  Run& run(const std::string& name, const TrainConfig& cfg, const std::string& data);
  const MetricsReport& evaluate(Run& r, const std::string& data);
  void note(const std::string& msg) const;

  TrainConfig base_;
  ExperimentOptions options_;
  std::map<std::string, SplitData> datasets_;
  std::map<std::string, std::unique_ptr<Run>> runs_;  // keyed by data + config
  std::unique_ptr<PretextResult> pretext_;
};

}  // namespace swinseg
