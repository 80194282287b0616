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

// Segmentation networks: the Swin-Unet and a convolutional U-Net baseline,
// both behind the SegmentationModel interface used by the trainer.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swinseg/parameters.hpp"
#include "swinseg/swin.hpp"

namespace swinseg {

struct SwinUnetConfig {
  Index height = 64;
  Index width = 64;
  Index in_channels = 3;
  Index embed_dim = 48;
  int stages = 3;                      // encoder stages; a bottleneck follows
  std::vector<int> heads{3, 6, 12, 24};  // stages + 1 entries
  Index window = 4;
  int classes = 3;                     // background, parotid, tumor
  bool relative_bias = true;
  Index mlp_ratio = 4;

  static SwinUnetConfig desk();   // 64x64, C=48, M=4
  static SwinUnetConfig paper();  // 224x224, C=96, M=7

  // Every stage extent must be a whole number of (effective) windows and
  // every stage's channel extent a multiple of its head count.
  void validate() const;

  Index stage_extent_h(int stage) const { return height / 4 >> stage; }
  Index stage_extent_w(int stage) const { return width / 4 >> stage; }
  Index stage_channels(int stage) const { return embed_dim << stage; }
};

void to_json(nlohmann::json& j, const SwinUnetConfig& c);
void from_json(const nlohmann::json& j, SwinUnetConfig& c);

struct UNetBaselineConfig {
  Index height = 64;
  Index width = 64;
  Index in_channels = 3;
  Index base_channels = 16;
  int depth = 4;
  int classes = 3;

  void validate() const;
};

void to_json(nlohmann::json& j, const UNetBaselineConfig& c);
void from_json(const nlohmann::json& j, UNetBaselineConfig& c);

template <typename T>
class SegmentationModel {
 public:
  virtual ~SegmentationModel() = default;

  // image[B,H,W,Cin] -> logits[B,H,W,K]
  virtual Tensor<T> forward(const Tensor<T>& image) const = 0;
  virtual NamedParameterSet<T>& parameters() = 0;
  virtual const NamedParameterSet<T>& parameters() const = 0;
  virtual int num_classes() const = 0;
  virtual std::string kind() const = 0;
  virtual nlohmann::json config_json() const = 0;
};

// Concatenate (decoder, encoder) on channels, then linear 2C -> C.
template <typename T>
Tensor<T> skip_fuse(const Tensor<T>& decoder_x, const Tensor<T>& encoder_x,
                    const LinearParams<T>& p);

template <typename T>
struct SwinUnetParams {
  PatchEmbedParams<T> embed;
  std::vector<SwinBlockPairParams<T>> encoder;       // one pair per stage
  std::vector<PatchMergingParams<T>> merges;         // after each encoder stage
  SwinBlockPairParams<T> bottleneck;
  std::vector<PatchExpandingParams<T>> expands;      // indexed by target stage
  std::vector<LinearParams<T>> fuses;                // indexed by stage
  std::vector<SwinBlockPairParams<T>> decoder;       // indexed by stage
  LayerNormParams<T> decoder_norm;
  FinalExpandParams<T> final_expand;
  LinearParams<T> classifier;                        // [C, K]
};

// Intermediate feature shapes, filled when a trace is passed to forward.
struct SwinUnetTrace {
  Shape embedded;
  std::vector<Shape> encoder;  // block-pair outputs, i.e. the skip features
  Shape bottleneck;
  std::vector<Shape> decoder;  // in decoding order (deepest first)
};

template <typename T>
Tensor<T> forward_swin_unet(const Tensor<T>& image, const SwinUnetParams<T>& params,
                            const SwinUnetConfig& config, SwinUnetTrace* trace = nullptr);

template <typename T>
class SwinUnet final : public SegmentationModel<T> {
 public:
  // Parameters are initialized from `seed`; each tensor draws from a stream
  // derived from (seed, parameter name), so the init of one tensor does not
  // depend on which others exist.
  SwinUnet(SwinUnetConfig config, std::uint64_t seed);

  Tensor<T> forward(const Tensor<T>& image) const override {
    return forward_swin_unet(image, params_, config_);
  }
  Tensor<T> forward(const Tensor<T>& image, SwinUnetTrace* trace) const {
    return forward_swin_unet(image, params_, config_, trace);
  }
  NamedParameterSet<T>& parameters() override { return named_; }
  const NamedParameterSet<T>& parameters() const override { return named_; }
  int num_classes() const override { return config_.classes; }
  std::string kind() const override { return "swin_unet"; }
  nlohmann::json config_json() const override;

  const SwinUnetConfig& config() const { return config_; }
  const SwinUnetParams<T>& params() const { return params_; }

 private:
  SwinUnetConfig config_;
  SwinUnetParams<T> params_;
  NamedParameterSet<T> named_;
};

template <typename T>
class UNetBaseline final : public SegmentationModel<T> {
 public:
  UNetBaseline(UNetBaselineConfig config, std::uint64_t seed);

  Tensor<T> forward(const Tensor<T>& image) const override;
  NamedParameterSet<T>& parameters() override { return named_; }
  const NamedParameterSet<T>& parameters() const override { return named_; }
  int num_classes() const override { return config_.classes; }
  std::string kind() const override { return "unet"; }
  nlohmann::json config_json() const override;

  const UNetBaselineConfig& config() const { return config_; }

 private:
  struct Conv {
    Tensor<T> weight;  // [k,k,Cin,Cout]
    Tensor<T> bias;
  };
  struct Level {
    Conv conv1, conv2;
  };
  struct UpLevel {
    Conv up;  // 3x3 after nearest up-sampling, halves channels
    Conv conv1, conv2;
  };

  Conv make_conv(const std::string& name, Index k, Index cin, Index cout, std::uint64_t seed);

  UNetBaselineConfig config_;
  std::vector<Level> down_;
  Level bottom_;
  std::vector<UpLevel> up_;  // indexed by level
  Conv head_;
  NamedParameterSet<T> named_;
};

// Builds either network from a JSON record {"kind": "swin_unet"|"unet", ...}.
template <typename T>
std::unique_ptr<SegmentationModel<T>> make_model(const nlohmann::json& config, std::uint64_t seed);

// Names that belong to the encoder (transfer-learning scope).
bool is_encoder_parameter(const std::string& name);

}  // namespace swinseg
