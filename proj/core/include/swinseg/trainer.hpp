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

// Training loop, evaluation and the half-split prediction protocol.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swinseg/datagen.hpp"
#include "swinseg/metrics.hpp"
#include "swinseg/model.hpp"

namespace swinseg {

enum class ChannelMode { stacked, replicated_stir, replicated_t1, replicated_t2 };
std::string to_string(ChannelMode m);
ChannelMode channel_mode_from_string(const std::string& s);

enum class TransferMode { none, encoder };
std::string to_string(TransferMode m);
TransferMode transfer_mode_from_string(const std::string& s);

// How datasets are synthesized when no manifest is given, and for the
// center-pure datasets of the center ablation.
struct DataConfig {
  std::size_t count = 250;
  std::array<double, 2> center_mix{0.42, 0.58};
  PhantomSpec phantom;
  std::array<CenterProfile, 2> centers{CenterProfile::center1(), CenterProfile::center2()};
  std::uint64_t seed = 2024;
};

// Pretext pretraining on a phantom distribution disjoint from the target
// one: the same contrast signs at other magnitudes, smaller and more
// rotated glands, a third site profile.
struct PretextConfig {
  std::size_t count = 400;
  int epochs = 20;
  PhantomSpec phantom = default_phantom();
  CenterProfile center = default_center();

  static PhantomSpec default_phantom();
  static CenterProfile default_center();
};

struct TrainConfig {
  nlohmann::json model;  // {"kind": "swin_unet"|"unet", ...}
  int batch_size = 8;
  int epochs = 20;
  double learning_rate = 1e-4;
  double weight_decay = 0.05;
  std::uint64_t seed = 7;
  ChannelMode channels = ChannelMode::stacked;
  TransferMode transfer = TransferMode::none;
  std::string manifest;       // training (and default test) records
  std::string test_manifest;  // optional separate test records
  std::string pretrained;     // optional encoder checkpoint for transfer
  AggregationPolicy policy;
  DataConfig data;
  PretextConfig pretext;

  TrainConfig();
  // batch >= 1, epochs >= 1, lr >= 0 (0 is a dry run), wd >= 0, known model kind.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const DataConfig& c);
void from_json(const nlohmann::json& j, DataConfig& c);
void to_json(nlohmann::json& j, const PretextConfig& c);
void from_json(const nlohmann::json& j, PretextConfig& c);

// Reads and validates a JSON config file; missing keys keep their
// defaults. Throws ConfigError.
TrainConfig load_train_config(const std::filesystem::path& path);

// Kept (tumor-side) half-slices of one dataset.
struct SplitData {
  std::vector<SliceRecord> train;
  std::vector<SliceRecord> test;
};

SplitData kept_halves(const std::vector<SliceRecord>& train_full,
                      const std::vector<SliceRecord>& test_full);
// Loads cfg.manifest (and cfg.test_manifest when set) and splits each
// record into its kept half. Paths are relative to each manifest.
SplitData load_split(const TrainConfig& cfg);

// image channels in the order selected by `mode`: [1,H,W,3].
template <typename T>
Tensor<T> build_input(const SliceRecord& r, ChannelMode mode);
template <typename T>
Tensor<T> build_input(const std::array<Image, kModalities>& modalities, ChannelMode mode);
// Stacks records[indices] into [B,H,W,3]; labels are appended row-major.
template <typename T>
Tensor<T> build_batch(const std::vector<SliceRecord>& records,
                      const std::vector<std::size_t>& indices, ChannelMode mode,
                      std::vector<std::int32_t>* labels);

struct RunLog {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
  MetricsReport test;
  double wall_seconds = 0;  // informational, not reproducible
  nlohmann::json config;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const RunLog& log);

struct TrainResult {
  std::unique_ptr<SegmentationModel<float>> model;
  RunLog log;
};

struct TrainHooks {
  std::function<void(int epoch, double loss)> on_epoch;
};

struct PretextResult {
  NamedParameterSet<float> encoder;  // encoder-scoped parameters only
  std::vector<double> epoch_loss;
};

// Trains from scratch on data.train and evaluates on data.test. With
// transfer == encoder the encoder is initialized from `pretrained`, from
// cfg.pretrained, or from a fresh pretext run, in that order of preference.
TrainResult train(const TrainConfig& cfg, const SplitData& data, const TrainHooks& hooks = {},
                  const NamedParameterSet<float>* pretrained = nullptr);

// Loads the data named by cfg, trains, and writes <out>/model.ckpt and
// <out>/runlog.json.
TrainResult train_to_dir(const TrainConfig& cfg, const std::filesystem::path& out_dir,
                         const TrainHooks& hooks = {});

// Trains cfg.model on the pretext distribution; the seed stream is derived
// from cfg.seed so it never coincides with the target run's.
PretextResult pretrain_pretext(const TrainConfig& cfg, const TrainHooks& hooks = {});

// Mean cross-entropy over `records` without recording a graph.
double mean_loss(const SegmentationModel<float>& model, const std::vector<SliceRecord>& records,
                 ChannelMode mode, int batch_size);

// Per-pixel argmax of the logits of each record.
std::vector<LabelImage> predict_labels(const SegmentationModel<float>& model,
                                       const std::vector<SliceRecord>& records, ChannelMode mode,
                                       int batch_size);

MetricsReport evaluate_model(const SegmentationModel<float>& model,
                             const std::vector<SliceRecord>& records, ChannelMode mode,
                             const AggregationPolicy& policy, int batch_size);

// Argmax labels for one model-sized input.
LabelImage predict_half(const SegmentationModel<float>& model,
                        const std::array<Image, kModalities>& modalities, ChannelMode mode);

// Full-width slices are split into left/right halves, each half is
// classified, and the halves are concatenated. Inputs already at the
// model's width are classified directly.
LabelImage predict_full(const SegmentationModel<float>& model,
                        const std::array<Image, kModalities>& modalities, ChannelMode mode);

void save_model(const SegmentationModel<float>& model, const std::filesystem::path& path,
                const nlohmann::json& extra_meta = nlohmann::json::object());
// Rebuilds the network from the checkpoint's stored config.
std::unique_ptr<SegmentationModel<float>> load_model(const std::filesystem::path& path,
                                                     nlohmann::json* meta = nullptr);

}  // namespace swinseg
