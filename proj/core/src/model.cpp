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

#include "swinseg/model.hpp"

#include "swinseg/error.hpp"
#include "swinseg/rng.hpp"

namespace swinseg {

SwinUnetConfig SwinUnetConfig::desk() { return SwinUnetConfig{}; }

SwinUnetConfig SwinUnetConfig::paper() {
  SwinUnetConfig c;
  c.height = 224;
  c.width = 224;
  c.embed_dim = 96;
  c.window = 7;
  return c;
}

void SwinUnetConfig::validate() const {
  if (in_channels <= 0 || embed_dim <= 0 || window <= 0 || mlp_ratio <= 0) {
    throw ConfigError("SwinUnetConfig: extents must be positive");
  }
  if (stages < 1) throw ConfigError("SwinUnetConfig: need at least one encoder stage");
  if (classes < 2) throw ConfigError("SwinUnetConfig: need at least two classes");
  if (static_cast<int>(heads.size()) != stages + 1) {
    throw ConfigError("SwinUnetConfig: expected " + std::to_string(stages + 1) +
                      " head counts (stages + bottleneck)");
  }
  const Index align = Index{4} << stages;
  if (height <= 0 || width <= 0 || height % align != 0 || width % align != 0) {
    throw ConfigError("SwinUnetConfig: input " + std::to_string(height) + "x" +
                      std::to_string(width) + " must be divisible by " + std::to_string(align));
  }
  for (int s = 0; s <= stages; ++s) {
    const Index h = stage_extent_h(s), w = stage_extent_w(s);
    for (bool shifted : {false, true}) {
      const WindowConfig wc = effective_window(h, w, window, shifted);
      if (h % wc.window != 0 || w % wc.window != 0) {
        throw ConfigError("SwinUnetConfig: stage " + std::to_string(s) + " extent " +
                          std::to_string(h) + "x" + std::to_string(w) +
                          " is not a whole number of windows");
      }
    }
    if (heads[s] <= 0 || stage_channels(s) % heads[s] != 0) {
      throw ConfigError("SwinUnetConfig: " + std::to_string(heads[s]) +
                        " heads do not divide " + std::to_string(stage_channels(s)) +
                        " channels at stage " + std::to_string(s));
    }
  }
}

void to_json(nlohmann::json& j, const SwinUnetConfig& c) {
  j = nlohmann::json{{"kind", "swin_unet"},        {"height", c.height},
                     {"width", c.width},           {"in_channels", c.in_channels},
                     {"embed_dim", c.embed_dim},   {"stages", c.stages},
                     {"heads", c.heads},           {"window", c.window},
                     {"classes", c.classes},       {"relative_bias", c.relative_bias},
                     {"mlp_ratio", c.mlp_ratio}};
}

void from_json(const nlohmann::json& j, SwinUnetConfig& c) {
  SwinUnetConfig d;
  c.height = j.value("height", d.height);
  c.width = j.value("width", d.width);
  c.in_channels = j.value("in_channels", d.in_channels);
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.stages = j.value("stages", d.stages);
  c.heads = j.value("heads", d.heads);
  c.window = j.value("window", d.window);
  c.classes = j.value("classes", d.classes);
  c.relative_bias = j.value("relative_bias", d.relative_bias);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
}

void UNetBaselineConfig::validate() const {
  if (depth < 1 || base_channels <= 0 || in_channels <= 0) {
    throw ConfigError("UNetBaselineConfig: extents must be positive");
  }
  if (classes < 2) throw ConfigError("UNetBaselineConfig: need at least two classes");
  const Index align = Index{1} << depth;
  if (height <= 0 || width <= 0 || height % align != 0 || width % align != 0) {
    throw ConfigError("UNetBaselineConfig: input must be divisible by 2^depth");
  }
}

void to_json(nlohmann::json& j, const UNetBaselineConfig& c) {
  j = nlohmann::json{{"kind", "unet"},
                     {"height", c.height},
                     {"width", c.width},
                     {"in_channels", c.in_channels},
                     {"base_channels", c.base_channels},
                     {"depth", c.depth},
                     {"classes", c.classes}};
}

void from_json(const nlohmann::json& j, UNetBaselineConfig& c) {
  UNetBaselineConfig d;
  c.height = j.value("height", d.height);
  c.width = j.value("width", d.width);
  c.in_channels = j.value("in_channels", d.in_channels);
  c.base_channels = j.value("base_channels", d.base_channels);
  c.depth = j.value("depth", d.depth);
  c.classes = j.value("classes", d.classes);
}

bool is_encoder_parameter(const std::string& name) { return name.starts_with("encoder."); }

template <typename T>
Tensor<T> skip_fuse(const Tensor<T>& decoder_x, const Tensor<T>& encoder_x,
                    const LinearParams<T>& p) {
  if (decoder_x.shape() != encoder_x.shape()) {
    throw DimensionError("skip_fuse: decoder " + to_string(decoder_x.shape()) +
                         " and encoder " + to_string(encoder_x.shape()) + " differ");
  }
  return dense(concat_last(decoder_x, encoder_x), p);
}

// ---------------------------------------------------------------------------
// Initialization

namespace {

template <typename T>
class Initializer {
 public:
  Initializer(NamedParameterSet<T>& named, std::uint64_t seed) : named_(named), seed_(seed) {}

  Tensor<T> trunc_normal(const std::string& name, Shape shape, double stddev = 0.02) {
    Rng rng(mix_seed(seed_, name));
    std::vector<T> v(static_cast<std::size_t>(numel(shape)));
    for (auto& x : v) x = static_cast<T>(rng.truncated_normal(stddev));
    return add(name, std::move(shape), std::move(v));
  }
  Tensor<T> constant(const std::string& name, Shape shape, T value) {
    std::vector<T> v(static_cast<std::size_t>(numel(shape)), value);
    return add(name, std::move(shape), std::move(v));
  }
  LinearParams<T> linear(const std::string& name, Index in, Index out, bool bias = true) {
    LinearParams<T> p;
    p.weight = trunc_normal(name + ".weight", {in, out});
    if (bias) p.bias = constant(name + ".bias", {out}, T(0));
    return p;
  }
  LayerNormParams<T> norm(const std::string& name, Index c) {
    LayerNormParams<T> p;
    p.gamma = constant(name + ".gamma", {c}, T(1));
    p.beta = constant(name + ".beta", {c}, T(0));
    return p;
  }

 private:
  Tensor<T> add(const std::string& name, Shape shape, std::vector<T> v) {
    auto t = Tensor<T>::from_data(std::move(shape), std::move(v), true);
    named_.add(name, t);
    return t;
  }

  NamedParameterSet<T>& named_;
  std::uint64_t seed_;
};

template <typename T>
SwinBlockPairParams<T> make_pair(Initializer<T>& init, const std::string& prefix, Index channels,
                                 int heads, const SwinUnetConfig& cfg, Index h, Index w) {
  SwinBlockPairParams<T> pair;
  pair.window = cfg.window;
  for (int b = 0; b < 2; ++b) {
    const std::string p = prefix + ".block" + std::to_string(b);
    auto& blk = pair.blocks[b];
    blk.norm1 = init.norm(p + ".norm1", channels);
    blk.attn.heads = heads;
    blk.attn.qkv = init.linear(p + ".attn.qkv", channels, 3 * channels);
    blk.attn.proj = init.linear(p + ".attn.proj", channels, channels);
    if (cfg.relative_bias) {
      const Index m = effective_window(h, w, cfg.window, b == 1).window;
      blk.attn.relative_bias =
          init.trunc_normal(p + ".attn.relative_bias", {(2 * m - 1) * (2 * m - 1), heads});
    }
    blk.norm2 = init.norm(p + ".norm2", channels);
    blk.fc1 = init.linear(p + ".mlp.fc1", channels, cfg.mlp_ratio * channels);
    blk.fc2 = init.linear(p + ".mlp.fc2", cfg.mlp_ratio * channels, channels);
  }
  return pair;
}

}  // namespace

template <typename T>
SwinUnet<T>::SwinUnet(SwinUnetConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Initializer<T> init(named_, seed);
  const auto& c = config_;
  const Index C = c.embed_dim;

  params_.embed.weight = init.trunc_normal("encoder.embed.proj.weight", {4, 4, c.in_channels, C});
  params_.embed.bias = init.constant("encoder.embed.proj.bias", {C}, T(0));
  params_.embed.norm = init.norm("encoder.embed.norm", C);

  for (int s = 0; s < c.stages; ++s) {
    const std::string p = "encoder.stage" + std::to_string(s);
    const Index ch = c.stage_channels(s);
    params_.encoder.push_back(
        make_pair(init, p, ch, c.heads[s], c, c.stage_extent_h(s), c.stage_extent_w(s)));
    PatchMergingParams<T> m;
    m.norm = init.norm(p + ".merge.norm", 4 * ch);
    m.reduction = init.linear(p + ".merge.reduction", 4 * ch, 2 * ch, false);
    params_.merges.push_back(m);
  }
  params_.bottleneck = make_pair(init, "encoder.bottleneck", c.stage_channels(c.stages),
                                 c.heads[c.stages], c, c.stage_extent_h(c.stages),
                                 c.stage_extent_w(c.stages));

  params_.expands.resize(c.stages);
  params_.fuses.resize(c.stages);
  params_.decoder.resize(c.stages);
  for (int s = c.stages - 1; s >= 0; --s) {
    const std::string p = "decoder.stage" + std::to_string(s);
    const Index ch = c.stage_channels(s);
    params_.expands[s].expand = init.linear(p + ".expand.linear", 2 * ch, 4 * ch, false);
    params_.expands[s].norm = init.norm(p + ".expand.norm", ch);
    params_.fuses[s] = init.linear(p + ".fuse", 2 * ch, ch);
    params_.decoder[s] =
        make_pair(init, p, ch, c.heads[s], c, c.stage_extent_h(s), c.stage_extent_w(s));
  }
  params_.decoder_norm = init.norm("decoder.norm", C);
  params_.final_expand.expand = init.linear("head.expand", C, 16 * C, false);
  params_.classifier = init.linear("head.classifier", C, c.classes);
}

template <typename T>
nlohmann::json SwinUnet<T>::config_json() const {
  return config_;
}

template <typename T>
Tensor<T> forward_swin_unet(const Tensor<T>& image, const SwinUnetParams<T>& params,
                            const SwinUnetConfig& config, SwinUnetTrace* trace) {
  if (image.rank() != 4 || image.dim(1) != config.height || image.dim(2) != config.width ||
      image.dim(3) != config.in_channels) {
    throw DimensionError("forward_swin_unet: image " + to_string(image.shape()) +
                         " does not match config " + std::to_string(config.height) + "x" +
                         std::to_string(config.width) + "x" +
                         std::to_string(config.in_channels));
  }
  Tensor<T> x = patch_partition_embed(image, params.embed);
  if (trace) trace->embedded = x.shape();

  std::vector<Tensor<T>> skips;
  for (int s = 0; s < config.stages; ++s) {
    x = swin_block_pair(x, params.encoder[s]);
    skips.push_back(x);
    if (trace) trace->encoder.push_back(x.shape());
    x = patch_merging(x, params.merges[s]);
  }
  x = swin_block_pair(x, params.bottleneck);
  if (trace) trace->bottleneck = x.shape();

  for (int s = config.stages - 1; s >= 0; --s) {
    x = patch_expanding(x, params.expands[s]);
    x = skip_fuse(x, skips[s], params.fuses[s]);
    x = swin_block_pair(x, params.decoder[s]);
    if (trace) trace->decoder.push_back(x.shape());
  }
  x = layer_norm(x, params.decoder_norm);
  x = final_patch_expanding_x4(x, params.final_expand);
  return dense(x, params.classifier);
}

template <typename T>
std::unique_ptr<SegmentationModel<T>> make_model(const nlohmann::json& config, std::uint64_t seed) {
  const std::string kind = config.value("kind", std::string("swin_unet"));
  if (kind == "swin_unet") return std::make_unique<SwinUnet<T>>(config.get<SwinUnetConfig>(), seed);
  if (kind == "unet") return std::make_unique<UNetBaseline<T>>(config.get<UNetBaselineConfig>(), seed);
  throw ConfigError("unknown model kind: " + kind);
}

template Tensor<float> skip_fuse(const Tensor<float>&, const Tensor<float>&,
                                 const LinearParams<float>&);
template Tensor<double> skip_fuse(const Tensor<double>&, const Tensor<double>&,
                                  const LinearParams<double>&);
template Tensor<float> forward_swin_unet(const Tensor<float>&, const SwinUnetParams<float>&,
                                         const SwinUnetConfig&, SwinUnetTrace*);
template Tensor<double> forward_swin_unet(const Tensor<double>&, const SwinUnetParams<double>&,
                                          const SwinUnetConfig&, SwinUnetTrace*);
template class SwinUnet<float>;
template class SwinUnet<double>;
template std::unique_ptr<SegmentationModel<float>> make_model(const nlohmann::json&, std::uint64_t);
template std::unique_ptr<SegmentationModel<double>> make_model(const nlohmann::json&, std::uint64_t);

}  // namespace swinseg
