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

#include "swinseg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "swinseg/checkpoint.hpp"
#include "swinseg/error.hpp"
#include "swinseg/ops.hpp"
#include "swinseg/optim.hpp"
#include "swinseg/rng.hpp"

namespace swinseg {
namespace {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

struct FitOptions {
  int batch_size = 8;
  int epochs = 1;
  AdamWOptions adamw;
  ChannelMode channels = ChannelMode::stacked;
  std::uint64_t shuffle_seed = 0;
};

// Minibatch AdamW over shuffled records; returns the mean loss per epoch.
std::vector<double> fit(SegmentationModel<float>& model, const std::vector<SliceRecord>& records,
                        const FitOptions& opt, const TrainHooks& hooks) {
  if (records.empty()) throw DataError("training split is empty");
  auto& params = model.parameters();
  auto state = OptimizerState<float>::init(params, opt.adamw);
  Rng shuffle(opt.shuffle_seed);
  const std::size_t n = records.size();
  const auto batch = static_cast<std::size_t>(opt.batch_size);
  std::vector<double> epoch_loss;
  std::vector<std::int32_t> labels;
  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    const auto order = shuffle.permutation(n);
    double total = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
      labels.clear();
      const auto x = build_batch<float>(records, idx, opt.channels, &labels);
      auto loss = cross_entropy_loss(model.forward(x), std::span<const std::int32_t>(labels));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw DivergenceError("non-finite training loss in epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batches + 1),
                              epoch);
      }
      params.zero_grad();
      loss.backward();
      adamw_step(params, state);
      total += value;
      ++batches;
    }
    epoch_loss.push_back(total / static_cast<double>(batches));
    if (hooks.on_epoch) hooks.on_epoch(epoch, epoch_loss.back());
  }
  return epoch_loss;
}

FitOptions fit_options(const TrainConfig& cfg, int epochs, std::uint64_t shuffle_seed) {
  FitOptions o;
  o.batch_size = cfg.batch_size;
  o.epochs = epochs;
  o.adamw.learning_rate = cfg.learning_rate;
  o.adamw.weight_decay = cfg.weight_decay;
  o.channels = cfg.channels;
  o.shuffle_seed = shuffle_seed;
  return o;
}

std::pair<Index, Index> model_extent(const SegmentationModel<float>& model) {
  const auto j = model.config_json();
  return {j.at("height").get<Index>(), j.at("width").get<Index>()};
}

void check_extents(const SegmentationModel<float>& model, const std::vector<SliceRecord>& records,
                   const char* what) {
  const auto [h, w] = model_extent(model);
  for (const auto& r : records) {
    if (r.height() != h || r.width() != w) {
      throw DataError(std::string(what) + " record is " + std::to_string(r.height()) + "x" +
                      std::to_string(r.width()) + " but the model expects " +
                      std::to_string(h) + "x" + std::to_string(w));
    }
  }
}

std::vector<LabelImage> argmax_labels(const Tensor<float>& logits) {
  const Shape& s = logits.shape();
  const Index b = s[0], h = s[1], w = s[2], k = s[3];
  const float* p = logits.data().data();
  std::vector<LabelImage> out;
  for (Index n = 0; n < b; ++n) {
    LabelImage img(h, w);
    for (Index i = 0; i < h * w; ++i) {
      const float* row = p + (n * h * w + i) * k;
      Index best = 0;
      for (Index c = 1; c < k; ++c) {
        if (row[c] > row[best]) best = c;
      }
      img.labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(best);
    }
    out.push_back(std::move(img));
  }
  return out;
}

const Image& channel_source(const std::array<Image, kModalities>& m, ChannelMode mode, int c) {
  switch (mode) {
    case ChannelMode::stacked: return m[static_cast<std::size_t>(c)];
    case ChannelMode::replicated_stir: return m[kStir];
    case ChannelMode::replicated_t1: return m[kT1];
    case ChannelMode::replicated_t2: return m[kT2];
  }
  throw ValidationError("unknown channel mode");
}

template <typename T>
void fill_input(const std::array<Image, kModalities>& m, ChannelMode mode, T* dst) {
  const Image& ref = m[0];
  for (const auto& img : m) {
    if (img.height != ref.height || img.width != ref.width) {
      throw DimensionError("build_input: modality extents differ");
    }
  }
  const std::size_t hw = ref.pixels.size();
  for (int c = 0; c < 3; ++c) {
    const auto& src = channel_source(m, mode, c).pixels;
    for (std::size_t i = 0; i < hw; ++i) dst[i * 3 + static_cast<std::size_t>(c)] = static_cast<T>(src[i]);
  }
}

std::vector<SliceRecord> pretext_records(const TrainConfig& cfg) {
  const std::uint64_t seed = mix_seed(cfg.seed, "pretext-data");
  std::vector<SliceRecord> out;
  out.reserve(cfg.pretext.count);
  for (std::size_t i = 0; i < cfg.pretext.count; ++i) {
    const auto full = generate_slice(cfg.pretext.phantom, cfg.pretext.center, mix_seed(seed, i));
    out.push_back(split_left_right(full).kept);
  }
  return out;
}

}  // namespace

std::string to_string(ChannelMode m) {
  switch (m) {
    case ChannelMode::stacked: return "stacked";
    case ChannelMode::replicated_stir: return "replicated_stir";
    case ChannelMode::replicated_t1: return "replicated_t1";
    case ChannelMode::replicated_t2: return "replicated_t2";
  }
  return "?";
}

ChannelMode channel_mode_from_string(const std::string& s) {
  for (auto m : {ChannelMode::stacked, ChannelMode::replicated_stir, ChannelMode::replicated_t1,
                 ChannelMode::replicated_t2}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown channel mode '" + s +
                    "' (expected stacked, replicated_stir, replicated_t1 or replicated_t2)");
}

std::string to_string(TransferMode m) { return m == TransferMode::none ? "none" : "encoder"; }

TransferMode transfer_mode_from_string(const std::string& s) {
  if (s == "none") return TransferMode::none;
  if (s == "encoder") return TransferMode::encoder;
  throw ConfigError("unknown transfer mode '" + s + "' (expected none or encoder)");
}

PhantomSpec PretextConfig::default_phantom() {
  PhantomSpec s;
  s.gland_axis_row = {0.16, 0.24};
  s.gland_axis_col = {0.14, 0.22};
  s.gland_rotation = {-1.2, 1.2};
  s.tumor_radius_fraction = {0.45, 0.70};
  s.contrast = {{
      {0.15, 0.35, 0.95},
      {0.30, 0.85, 0.80},
      {0.25, 0.45, 0.50},
  }};
  s.modality_noise = {0.04, 0.0, 0.0};
  return s;
}

CenterProfile PretextConfig::default_center() {
  CenterProfile c;
  c.id = 3;
  c.noise_sigma = 0.05;
  c.blur_sigma = 0.5;
  return c;
}

TrainConfig::TrainConfig() : model(SwinUnetConfig::desk()) {}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  // lr = 0 is accepted as a no-op run.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a finite value >= 0");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!model.is_object()) throw ConfigError("model must be a JSON object");
  const std::string kind = model.value("kind", std::string("swin_unet"));
  if (kind == "swin_unet") {
    model.get<SwinUnetConfig>().validate();
  } else if (kind == "unet") {
    model.get<UNetBaselineConfig>().validate();
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  if (pretext.epochs < 1) throw ConfigError("pretext.epochs must be >= 1");
  if (pretext.count < 1) throw ConfigError("pretext.count must be >= 1");
}

void to_json(nlohmann::json& j, const DataConfig& c) {
  j = nlohmann::json{{"count", c.count},   {"center_mix", c.center_mix},
                     {"phantom", c.phantom}, {"centers", c.centers},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, DataConfig& c) {
  get_if_present(j, "count", c.count);
  get_if_present(j, "center_mix", c.center_mix);
  if (j.contains("phantom")) from_json(j.at("phantom"), c.phantom);
  if (j.contains("centers")) {
    const auto& a = j.at("centers");
    if (!a.is_array() || a.size() != 2) throw ConfigError("data.centers must list two profiles");
    from_json(a[0], c.centers[0]);
    from_json(a[1], c.centers[1]);
  }
  get_if_present(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const PretextConfig& c) {
  j = nlohmann::json{
      {"count", c.count}, {"epochs", c.epochs}, {"phantom", c.phantom}, {"center", c.center}};
}

void from_json(const nlohmann::json& j, PretextConfig& c) {
  get_if_present(j, "count", c.count);
  get_if_present(j, "epochs", c.epochs);
  if (j.contains("phantom")) from_json(j.at("phantom"), c.phantom);
  if (j.contains("center")) from_json(j.at("center"), c.center);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"model", c.model},
                     {"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"learning_rate", c.learning_rate},
                     {"weight_decay", c.weight_decay},
                     {"seed", c.seed},
                     {"channels", to_string(c.channels)},
                     {"transfer", to_string(c.transfer)},
                     {"manifest", c.manifest},
                     {"test_manifest", c.test_manifest},
                     {"pretrained", c.pretrained},
                     {"policy",
                      {{"dsc", c.policy.dsc == ClassSet::all ? "all" : "foreground"},
                       {"mpa", c.policy.mpa == ClassSet::all ? "all" : "foreground"},
                       {"miou", c.policy.miou == ClassSet::all ? "all" : "foreground"},
                       {"pooled", c.policy.pooled}}},
                     {"data", c.data},
                     {"pretext", c.pretext}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (j.contains("model")) {
    // Partial model records are completed from the desk defaults.
    nlohmann::json m = j.at("model");
    const std::string kind = m.value("kind", std::string("swin_unet"));
    nlohmann::json base = kind == "unet" ? nlohmann::json(UNetBaselineConfig{})
                                         : nlohmann::json(SwinUnetConfig::desk());
    base.update(m);
    c.model = base;
  }
  get_if_present(j, "batch_size", c.batch_size);
  get_if_present(j, "epochs", c.epochs);
  get_if_present(j, "learning_rate", c.learning_rate);
  get_if_present(j, "weight_decay", c.weight_decay);
  get_if_present(j, "seed", c.seed);
  if (j.contains("channels")) c.channels = channel_mode_from_string(j.at("channels").get<std::string>());
  if (j.contains("transfer")) c.transfer = transfer_mode_from_string(j.at("transfer").get<std::string>());
  get_if_present(j, "manifest", c.manifest);
  get_if_present(j, "test_manifest", c.test_manifest);
  get_if_present(j, "pretrained", c.pretrained);
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    auto set = [&](const char* key, ClassSet& field) {
      if (!p.contains(key)) return;
      const auto v = p.at(key).get<std::string>();
      if (v == "all") {
        field = ClassSet::all;
      } else if (v == "foreground") {
        field = ClassSet::foreground;
      } else {
        throw ConfigError(std::string("policy.") + key + " must be 'all' or 'foreground'");
      }
    };
    set("dsc", c.policy.dsc);
    set("mpa", c.policy.mpa);
    set("miou", c.policy.miou);
    get_if_present(p, "pooled", c.policy.pooled);
  }
  if (j.contains("data")) from_json(j.at("data"), c.data);
  if (j.contains("pretext")) from_json(j.at("pretext"), c.pretext);
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    TrainConfig cfg = nlohmann::json::parse(in).get<TrainConfig>();
    // Relative manifest paths are taken relative to the config file.
    const auto base = path.parent_path();
    for (std::string* p : {&cfg.manifest, &cfg.test_manifest, &cfg.pretrained}) {
      if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SplitData kept_halves(const std::vector<SliceRecord>& train_full,
                      const std::vector<SliceRecord>& test_full) {
  SplitData d;
  for (const auto& r : train_full) d.train.push_back(split_left_right(r).kept);
  for (const auto& r : test_full) d.test.push_back(split_left_right(r).kept);
  return d;
}

SplitData load_split(const TrainConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("no dataset manifest configured");
  const std::filesystem::path train_path(cfg.manifest);
  const auto train_manifest = read_manifest(train_path);
  const auto train_full = load_records(train_manifest, train_path.parent_path(), "train");
  std::vector<SliceRecord> test_full;
  if (cfg.test_manifest.empty()) {
    test_full = load_records(train_manifest, train_path.parent_path(), "test");
  } else {
    const std::filesystem::path test_path(cfg.test_manifest);
    test_full = load_records(read_manifest(test_path), test_path.parent_path(), "test");
  }
  return kept_halves(train_full, test_full);
}

template <typename T>
Tensor<T> build_input(const std::array<Image, kModalities>& modalities, ChannelMode mode) {
  const Index h = modalities[0].height, w = modalities[0].width;
  std::vector<T> data(static_cast<std::size_t>(h * w * 3));
  fill_input(modalities, mode, data.data());
  return Tensor<T>::from_data({1, h, w, 3}, std::move(data));
}

template <typename T>
Tensor<T> build_input(const SliceRecord& r, ChannelMode mode) {
  for (const auto& img : r.modalities) {
    if (img.height != r.height() || img.width != r.width()) {
      throw DimensionError("build_input: image extents differ from the label mask");
    }
  }
  return build_input<T>(r.modalities, mode);
}

template <typename T>
Tensor<T> build_batch(const std::vector<SliceRecord>& records,
                      const std::vector<std::size_t>& indices, ChannelMode mode,
                      std::vector<std::int32_t>* labels) {
  if (indices.empty()) throw ValidationError("build_batch: empty batch");
  const Index h = records[indices[0]].height(), w = records[indices[0]].width();
  const auto plane = static_cast<std::size_t>(h * w);
  std::vector<T> data(indices.size() * plane * 3);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const SliceRecord& r = records[indices[b]];
    if (r.height() != h || r.width() != w) {
      throw DimensionError("build_batch: records differ in extent");
    }
    fill_input(r.modalities, mode, data.data() + b * plane * 3);
    if (labels) labels->insert(labels->end(), r.label.labels.begin(), r.label.labels.end());
  }
  return Tensor<T>::from_data({static_cast<Index>(indices.size()), h, w, 3}, std::move(data));
}

nlohmann::json to_json(const RunLog& log) {
  return nlohmann::json{{"epoch_loss", log.epoch_loss},
                        {"test", to_json(log.test)},
                        {"wall_seconds", log.wall_seconds},
                        {"config", log.config},
                        {"seed", log.seed}};
}

PretextResult pretrain_pretext(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const auto records = pretext_records(cfg);
  auto model = make_model<float>(cfg.model, mix_seed(cfg.seed, "pretext-init"));
  check_extents(*model, records, "pretext");
  PretextResult result;
  result.epoch_loss = fit(*model, records,
                          fit_options(cfg, cfg.pretext.epochs, mix_seed(cfg.seed, "pretext-shuffle")),
                          hooks);
  for (const auto& [name, t] : model->parameters()) {
    if (is_encoder_parameter(name)) result.encoder.add(name, t.detach());
  }
  return result;
}

TrainResult train(const TrainConfig& cfg, const SplitData& data, const TrainHooks& hooks,
                  const NamedParameterSet<float>* pretrained) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.model = make_model<float>(cfg.model, cfg.seed);
  check_extents(*result.model, data.train, "training");
  check_extents(*result.model, data.test, "test");

  if (cfg.transfer == TransferMode::encoder) {
    NamedParameterSet<float> loaded;
    if (!pretrained) {
      if (!cfg.pretrained.empty()) {
        loaded = load_checkpoint<float>(cfg.pretrained);
      } else {
        loaded = pretrain_pretext(cfg).encoder;
      }
      pretrained = &loaded;
    }
    init_transfer(result.model->parameters(), *pretrained, TransferScope::encoder_only);
  }

  result.log.epoch_loss =
      fit(*result.model, data.train, fit_options(cfg, cfg.epochs, mix_seed(cfg.seed, "shuffle")),
          hooks);
  if (!data.test.empty()) {
    result.log.test =
        evaluate_model(*result.model, data.test, cfg.channels, cfg.policy, cfg.batch_size);
  }
  result.log.config = cfg;
  result.log.seed = cfg.seed;
  result.log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

TrainResult train_to_dir(const TrainConfig& cfg, const std::filesystem::path& out_dir,
                         const TrainHooks& hooks) {
  cfg.validate();
  const SplitData data = load_split(cfg);
  TrainResult result = train(cfg, data, hooks);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  save_model(*result.model, out_dir / "model.ckpt",
             {{"train", nlohmann::json(cfg)}, {"channels", to_string(cfg.channels)}});
  std::ofstream out(out_dir / "runlog.json");
  out << to_json(result.log).dump(2) << '\n';
  if (!out) throw DataError("cannot write " + (out_dir / "runlog.json").string());
  return result;
}

double mean_loss(const SegmentationModel<float>& model, const std::vector<SliceRecord>& records,
                 ChannelMode mode, int batch_size) {
  if (records.empty()) throw DataError("mean_loss: no records");
  NoGradGuard guard;
  const auto batch = static_cast<std::size_t>(std::max(batch_size, 1));
  double total = 0;
  std::vector<std::int32_t> labels;
  for (std::size_t start = 0; start < records.size(); start += batch) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(records.size(), start + batch); ++i) idx.push_back(i);
    labels.clear();
    const auto x = build_batch<float>(records, idx, mode, &labels);
    const double l = cross_entropy_loss(model.forward(x), std::span<const std::int32_t>(labels)).item();
    total += l * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(records.size());
}

std::vector<LabelImage> predict_labels(const SegmentationModel<float>& model,
                                       const std::vector<SliceRecord>& records, ChannelMode mode,
                                       int batch_size) {
  NoGradGuard guard;
  const auto batch = static_cast<std::size_t>(std::max(batch_size, 1));
  std::vector<LabelImage> out;
  for (std::size_t start = 0; start < records.size(); start += batch) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(records.size(), start + batch); ++i) idx.push_back(i);
    for (auto& img : argmax_labels(model.forward(build_batch<float>(records, idx, mode, nullptr)))) {
      out.push_back(std::move(img));
    }
  }
  return out;
}

MetricsReport evaluate_model(const SegmentationModel<float>& model,
                             const std::vector<SliceRecord>& records, ChannelMode mode,
                             const AggregationPolicy& policy, int batch_size) {
  std::vector<LabelImage> gts;
  gts.reserve(records.size());
  for (const auto& r : records) gts.push_back(r.label);
  return evaluate_dataset(predict_labels(model, records, mode, batch_size), gts,
                          model.num_classes(), policy);
}

LabelImage predict_half(const SegmentationModel<float>& model,
                        const std::array<Image, kModalities>& modalities, ChannelMode mode) {
  NoGradGuard guard;
  return std::move(argmax_labels(model.forward(build_input<float>(modalities, mode)))[0]);
}

LabelImage predict_full(const SegmentationModel<float>& model,
                        const std::array<Image, kModalities>& modalities, ChannelMode mode) {
  const auto [h, w] = model_extent(model);
  const Index in_w = modalities[0].width;
  if (modalities[0].height != h) {
    throw DimensionError("predict_full: input height " + std::to_string(modalities[0].height) +
                         " does not match the model's " + std::to_string(h));
  }
  if (in_w == w) return predict_half(model, modalities, mode);
  if (in_w % 2 != 0) {
    throw DimensionError("predict_full: width " + std::to_string(in_w) + " is odd");
  }
  if (in_w != 2 * w) {
    throw DimensionError("predict_full: width " + std::to_string(in_w) +
                         " is neither the model width nor twice it");
  }
  SliceRecord full;
  full.modalities = modalities;
  full.label = LabelImage(h, in_w);
  const auto halves = split_left_right(full);  // side is left: kept = left half
  return concat_halves(predict_half(model, halves.kept.modalities, mode),
                       predict_half(model, halves.discarded.modalities, mode));
}

void save_model(const SegmentationModel<float>& model, const std::filesystem::path& path,
                const nlohmann::json& extra_meta) {
  nlohmann::json meta = extra_meta;
  meta["model"] = model.config_json();
  save_checkpoint(model.parameters(), path, meta);
}

std::unique_ptr<SegmentationModel<float>> load_model(const std::filesystem::path& path,
                                                     nlohmann::json* meta) {
  nlohmann::json m;
  auto loaded = load_checkpoint<float>(path, &m);
  if (!m.contains("model")) {
    throw CheckpointError(CheckpointErrc::malformed_header,
                          path.string() + ": checkpoint carries no model config");
  }
  std::unique_ptr<SegmentationModel<float>> model;
  try {
    model = make_model<float>(m.at("model"), 0);
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointErrc::malformed_header, path.string() + ": " + e.what());
  }
  for (const auto& [name, t] : model->parameters()) {
    if (!loaded.contains(name)) {
      throw CheckpointError(CheckpointErrc::unknown_entry,
                            path.string() + ": missing parameter " + name);
    }
  }
  assign_parameters(model->parameters(), loaded);
  if (meta) *meta = std::move(m);
  return model;
}

template Tensor<float> build_input<float>(const SliceRecord&, ChannelMode);
template Tensor<double> build_input<double>(const SliceRecord&, ChannelMode);
template Tensor<float> build_input<float>(const std::array<Image, kModalities>&, ChannelMode);
template Tensor<double> build_input<double>(const std::array<Image, kModalities>&, ChannelMode);
template Tensor<float> build_batch<float>(const std::vector<SliceRecord>&,
                                          const std::vector<std::size_t>&, ChannelMode,
                                          std::vector<std::int32_t>*);
template Tensor<double> build_batch<double>(const std::vector<SliceRecord>&,
                                            const std::vector<std::size_t>&, ChannelMode,
                                            std::vector<std::int32_t>*);

}  // namespace swinseg
