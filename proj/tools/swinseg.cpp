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

// Command-line front end.
//
//   swinseg gen-data   --out data/
//   swinseg train      --config run.json --out runs/base
//   swinseg eval       --checkpoint runs/base/model.ckpt --manifest data/manifest.json
//   swinseg predict    --checkpoint ... --stir a.pgm --t1 b.pgm --t2 c.pgm --out pred/
//   swinseg complexity --preset paper
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// divergence, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "swinseg/checkpoint.hpp"
#include "swinseg/error.hpp"
#include "swinseg/experiments.hpp"
#include "swinseg/pgm.hpp"
#include "swinseg/trainer.hpp"

namespace fs = std::filesystem;
using namespace swinseg;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kDivergence = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool quiet = false;
};

void log_line(const Common& c, const std::string& s) {
  if (!c.quiet) std::cerr << s << '\n';
}

TrainConfig load_config(const Common& c) {
  TrainConfig cfg = c.config.empty() ? TrainConfig{} : load_train_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

TrainHooks epoch_logger(const Common& c) {
  TrainHooks h;
  h.on_epoch = [&c](int epoch, double loss) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "epoch %d  loss %.6f", epoch, loss);
    log_line(c, buf);
  };
  return h;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

void print_report(const MetricsReport& r) {
  std::printf("DSC %.2f  MPA %.2f  MIoU %.2f  HD %.2f  (%s)\n", 100 * r.dsc, 100 * r.mpa,
              100 * r.miou, r.hd, r.policy.c_str());
}

ChannelMode checkpoint_channels(const nlohmann::json& meta, ChannelMode fallback) {
  if (meta.contains("channels")) return channel_mode_from_string(meta.at("channels"));
  return fallback;
}

int run_table(const Common& c, const std::string& stem,
              ResultTable (ExperimentSuite::*experiment)()) {
  const TrainConfig cfg = load_config(c);
  ExperimentOptions opts;
  opts.work_dir = c.out;
  opts.log = [&c](const std::string& s) { log_line(c, s); };
  ExperimentSuite suite(cfg, opts);
  const ResultTable table = (suite.*experiment)();
  write_table(table.text(), c.out, stem);
  write_json(fs::path(c.out) / (stem + ".json"), to_json(table));
  write_json(fs::path(c.out) / (stem + "_runs.json"), suite.summary());
  std::cout << to_text(table.text());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swin-Unet segmentation of multimodal phantom slices"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Override the configured seed");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_flag("-q,--quiet", common.quiet, "No progress output");
  };

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Synthesize a phantom dataset and its manifest");
  add_common(gen);
  std::optional<std::size_t> gen_count;
  std::optional<double> gen_mix;
  gen->add_option("--count", gen_count, "Number of slices (>= 10)");
  gen->add_option("--center1-fraction", gen_mix, "Fraction of center-1 slices")
      ->check(CLI::Range(0.0, 1.0));

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model and write model.ckpt + runlog.json");
  add_common(train_cmd);
  std::string train_manifest;
  train_cmd->add_option("--manifest", train_manifest, "Dataset manifest (overrides the config)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest's test split");
  add_common(eval_cmd);
  std::string eval_ckpt, eval_manifest, eval_split = "test";
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", eval_split)->check(CLI::IsMember({"train", "test"}));

  // predict
  auto* pred = app.add_subcommand("predict", "Segment slices and write 8-bit PGM masks");
  add_common(pred);
  std::string pred_ckpt, pred_manifest, pred_stir, pred_t1, pred_t2;
  pred->add_option("--checkpoint", pred_ckpt)->required()->check(CLI::ExistingFile);
  auto* pm = pred->add_option("--manifest", pred_manifest, "Predict every test record");
  auto* ps = pred->add_option("--stir", pred_stir);
  pred->add_option("--t1", pred_t1)->needs(ps);
  pred->add_option("--t2", pred_t2)->needs(ps);
  pm->excludes(ps);

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Pretext pretraining; writes encoder.ckpt");
  add_common(pre);

  auto* abl_ch = app.add_subcommand("ablate-channels", "Replicated single modalities vs stacked");
  add_common(abl_ch);
  auto* abl_tr = app.add_subcommand("ablate-transfer", "Pretext transfer vs random init");
  add_common(abl_tr);
  auto* abl_ce = app.add_subcommand("ablate-centers", "Mixed, same-center and cross-center runs");
  add_common(abl_ce);
  auto* cmp = app.add_subcommand("compare-baseline", "Swin-Unet vs the U-Net baseline");
  add_common(cmp);

  auto* cx = app.add_subcommand("complexity", "Per-stage MSA / W-MSA cost table");
  add_common(cx);
  std::string preset;
  cx->add_option("--preset", preset, "desk or paper (default: the configured model)")
      ->check(CLI::IsMember({"desk", "paper"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) {
      TrainConfig cfg = load_config(common);
      DataConfig d = cfg.data;
      if (common.seed) d.seed = *common.seed;
      if (gen_count) d.count = *gen_count;
      if (gen_mix) d.center_mix = {*gen_mix, 1.0 - *gen_mix};
      const auto m = make_dataset(d.count, d.center_mix, d.phantom, d.centers, d.seed, common.out);
      std::printf("%zu slices (%zu train, %zu test) -> %s\n", m.records.size(), m.count("train"),
                  m.count("test"), (fs::path(common.out) / "manifest.json").c_str());
    } else if (train_cmd->parsed()) {
      TrainConfig cfg = load_config(common);
      if (!train_manifest.empty()) cfg.manifest = train_manifest;
      const auto r = train_to_dir(cfg, common.out, epoch_logger(common));
      print_report(r.log.test);
    } else if (eval_cmd->parsed()) {
      const TrainConfig cfg = load_config(common);
      nlohmann::json meta;
      const auto model = load_model(eval_ckpt, &meta);
      const fs::path mp(eval_manifest);
      const auto full = load_records(read_manifest(mp), mp.parent_path(), eval_split);
      const auto halves = kept_halves({}, full).test;
      const auto report = evaluate_model(*model, halves, checkpoint_channels(meta, cfg.channels),
                                         cfg.policy, cfg.batch_size);
      write_json(fs::path(common.out) / "metrics.json", to_json(report));
      print_report(report);
    } else if (pred->parsed()) {
      const TrainConfig cfg = load_config(common);
      nlohmann::json meta;
      const auto model = load_model(pred_ckpt, &meta);
      const ChannelMode mode = checkpoint_channels(meta, cfg.channels);
      fs::create_directories(common.out);
      if (!pred_manifest.empty()) {
        const fs::path mp(pred_manifest);
        const auto manifest = read_manifest(mp);
        for (const auto& e : manifest.records) {
          if (e.split != "test") continue;
          const auto rec = read_slice(e.paths, mp.parent_path());
          char name[48];
          std::snprintf(name, sizeof name, "pred_%05d.pgm", e.id);
          write_pgm8(predict_full(*model, rec.modalities, mode), fs::path(common.out) / name);
        }
        std::printf("wrote %zu masks to %s\n", manifest.count("test"), common.out.c_str());
      } else if (!pred_stir.empty()) {
        if (pred_t1.empty() || pred_t2.empty()) {
          throw ConfigError("predict: --stir, --t1 and --t2 must be given together");
        }
        const std::array<Image, kModalities> images{read_pgm16(pred_stir), read_pgm16(pred_t1),
                                                    read_pgm16(pred_t2)};
        const fs::path out = fs::path(common.out) / "prediction.pgm";
        write_pgm8(predict_full(*model, images, mode), out);
        std::printf("wrote %s\n", out.c_str());
      } else {
        throw ConfigError("predict: give --manifest or --stir/--t1/--t2");
      }
    } else if (pre->parsed()) {
      const TrainConfig cfg = load_config(common);
      const auto r = pretrain_pretext(cfg, epoch_logger(common));
      fs::create_directories(common.out);
      save_checkpoint(r.encoder, fs::path(common.out) / "encoder.ckpt",
                      {{"scope", "encoder"}, {"model", cfg.model}});
      write_json(fs::path(common.out) / "pretext_log.json", {{"epoch_loss", r.epoch_loss}});
      std::printf("wrote %zu encoder tensors\n", r.encoder.size());
    } else if (abl_ch->parsed()) {
      return run_table(common, "channels", &ExperimentSuite::ablate_channels);
    } else if (abl_tr->parsed()) {
      return run_table(common, "transfer", &ExperimentSuite::ablate_transfer);
    } else if (abl_ce->parsed()) {
      return run_table(common, "centers", &ExperimentSuite::ablate_centers);
    } else if (cmp->parsed()) {
      return run_table(common, "baseline", &ExperimentSuite::compare_baseline);
    } else if (cx->parsed()) {
      const TrainConfig cfg = load_config(common);
      SwinUnetConfig sc;
      if (preset == "paper") {
        sc = SwinUnetConfig::paper();
      } else if (preset == "desk") {
        sc = SwinUnetConfig::desk();
      } else if (cfg.model.value("kind", std::string("swin_unet")) == "swin_unet") {
        sc = cfg.model.get<SwinUnetConfig>();
      } else {
        throw ConfigError("complexity: the configured model is not a Swin-Unet");
      }
      const auto table = complexity_table(sc);
      write_table(table, common.out, "complexity");
      std::cout << to_text(table);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOk;
}
