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

#include "swinseg/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "swinseg/error.hpp"
#include "swinseg/flops.hpp"
#include "swinseg/rng.hpp"

namespace swinseg {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool numeric(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789.-+e,") == std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

// Thousands separators keep FLOP counts readable.
std::string grouped(FlopCount v) {
  const std::string digits = to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

}  // namespace

std::string to_csv(const TextTable& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.headers.size(); ++i) {
    out << (i ? "," : "") << csv_escape(t.headers[i]);
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << '\n';
  }
  return out.str();
}

std::string to_text(const TextTable& t) {
  std::vector<std::size_t> width(t.headers.size(), 0);
  for (std::size_t i = 0; i < t.headers.size(); ++i) width[i] = t.headers[i].size();
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells, bool header) {
    std::string s;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < cells.size() ? cells[i] : "";
      const std::string pad(width[i] - cell.size(), ' ');
      if (i) s += "  ";
      s += (!header && numeric(cell)) ? pad + cell : cell + pad;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + '\n';
  };
  std::string out;
  if (!t.title.empty()) out += t.title + '\n';
  out += line(t.headers, true);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + '\n';
  for (const auto& row : t.rows) out += line(row, false);
  return out;
}

void write_table(const TextTable& t, const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / (stem + ".csv"), to_csv(t));
  write_file(dir / (stem + ".txt"), to_text(t));
}

TextTable ResultTable::text() const {
  TextTable t;
  t.title = title;
  t.headers = {key, "DSC", "MPA", "MIoU", "HD"};
  for (const auto& r : rows) {
    t.rows.push_back({r.label, fixed(100.0 * r.metrics.dsc, 2), fixed(100.0 * r.metrics.mpa, 2),
                      fixed(100.0 * r.metrics.miou, 2), fixed(r.metrics.hd, 2)});
  }
  return t;
}

const ResultRow& ResultTable::row(const std::string& label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw ValidationError("table '" + title + "' has no row '" + label + "'");
}

nlohmann::json to_json(const ResultTable& t) {
  auto rows = nlohmann::json::array();
  for (const auto& r : t.rows) rows.push_back({{"label", r.label}, {"metrics", to_json(r.metrics)}});
  return {{"title", t.title}, {"key", t.key}, {"rows", rows}};
}

TextTable complexity_table(const SwinUnetConfig& config) {
  config.validate();
  TextTable t;
  t.title = "Attention cost per stage";
  t.headers = {"stage", "h", "w", "C", "M", "MSA", "W-MSA", "ratio"};
  for (int s = 0; s <= config.stages; ++s) {
    const Index h = config.stage_extent_h(s), w = config.stage_extent_w(s);
    const Index m = effective_window(h, w, config.window, false).window;
    const ComplexityQuery q{h, w, config.stage_channels(s), m};
    const FlopCount msa = msa_flops(q), wmsa = wmsa_flops(q);
    t.rows.push_back({s == config.stages ? "bottleneck" : std::to_string(s + 1), std::to_string(h),
                      std::to_string(w), std::to_string(q.channels), std::to_string(m),
                      grouped(msa), grouped(wmsa),
                      fixed(static_cast<double>(msa) / static_cast<double>(wmsa), 2)});
  }
  return t;
}

struct ExperimentSuite::Run {
  std::string name;
  std::string data;
  TrainResult result;
  std::map<std::string, MetricsReport> evals;
};

ExperimentSuite::ExperimentSuite(TrainConfig base, ExperimentOptions options)
    : base_(std::move(base)), options_(std::move(options)) {
  base_.validate();
}

ExperimentSuite::~ExperimentSuite() = default;

void ExperimentSuite::note(const std::string& msg) const {
  if (options_.log) options_.log(msg);
}

const SplitData& ExperimentSuite::dataset(const std::string& name) {
  if (auto it = datasets_.find(name); it != datasets_.end()) return it->second;
  std::filesystem::path manifest;
  if (name == "mixed" && !base_.manifest.empty()) {
    manifest = base_.manifest;
  } else {
    std::array<double, 2> mix = base_.data.center_mix;
    std::uint64_t seed = base_.data.seed;
    if (name == "center1") {
      mix = {1.0, 0.0};
      seed = mix_seed(seed, "center1");
    } else if (name == "center2") {
      mix = {0.0, 1.0};
      seed = mix_seed(seed, "center2");
    } else if (name != "mixed") {
      throw ValidationError("unknown dataset '" + name + "'");
    }
    const auto dir = options_.work_dir / "data" / name;
    note("generating dataset " + name + " in " + dir.string());
    make_dataset(base_.data.count, mix, base_.data.phantom, base_.data.centers, seed, dir);
    manifest = dir / "manifest.json";
  }
  TrainConfig cfg = base_;
  cfg.manifest = manifest.string();
  cfg.test_manifest.clear();
  return datasets_.emplace(name, load_split(cfg)).first->second;
}

const PretextResult& ExperimentSuite::pretext() {
  if (!pretext_) {
    note("pretext pretraining");
    TrainHooks hooks;
    hooks.on_epoch = [this](int e, double l) {
      note("  pretext epoch " + std::to_string(e) + " loss " + fixed(l, 5));
    };
    pretext_ = std::make_unique<PretextResult>(pretrain_pretext(base_, hooks));
  }
  return *pretext_;
}

ExperimentSuite::Run& ExperimentSuite::run(const std::string& name, const TrainConfig& cfg,
                                           const std::string& data) {
  const std::string key = data + "|" + nlohmann::json(cfg).dump();
  if (auto it = runs_.find(key); it != runs_.end()) return *it->second;
  const SplitData& split = dataset(data);
  note("run " + name + " (" + std::to_string(split.train.size()) + " training slices)");
  TrainHooks hooks;
  hooks.on_epoch = [this, &name](int e, double l) {
    note("  " + name + " epoch " + std::to_string(e) + " loss " + fixed(l, 5));
  };
  auto r = std::make_unique<Run>();
  r->name = name;
  r->data = data;
  const NamedParameterSet<float>* pre = nullptr;
  if (cfg.transfer == TransferMode::encoder && cfg.pretrained.empty()) pre = &pretext().encoder;
  r->result = train(cfg, split, hooks, pre);
  r->evals[data] = r->result.log.test;
  note("  " + name + " test DSC " + fixed(100.0 * r->result.log.test.dsc, 2));

  const auto dir = options_.work_dir / "runs";
  std::filesystem::create_directories(dir);
  write_file(dir / (name + ".json"), to_json(r->result.log).dump(2) + "\n");
  return *runs_.emplace(key, std::move(r)).first->second;
}

const MetricsReport& ExperimentSuite::evaluate(Run& r, const std::string& data) {
  if (auto it = r.evals.find(data); it != r.evals.end()) return it->second;
  const TrainConfig& cfg = base_;
  const auto report = evaluate_model(*r.result.model, dataset(data).test,
                                     channel_mode_from_string(r.result.log.config.at("channels")),
                                     cfg.policy, cfg.batch_size);
  return r.evals.emplace(data, report).first->second;
}

const RunLog& ExperimentSuite::base_run() { return run("base", base_, "mixed").result.log; }

ResultTable ExperimentSuite::ablate_channels() {
  ResultTable t{"Input channel ablation", "channels", {}};
  const std::pair<ChannelMode, const char*> rows[] = {
      {ChannelMode::replicated_stir, "(STIR, STIR, STIR)"},
      {ChannelMode::replicated_t1, "(T1, T1, T1)"},
      {ChannelMode::replicated_t2, "(T2, T2, T2)"},
      {ChannelMode::stacked, "(STIR, T1, T2)"},
  };
  for (const auto& [mode, label] : rows) {
    TrainConfig cfg = base_;
    cfg.channels = mode;
    t.rows.push_back({label, run(to_string(mode), cfg, "mixed").result.log.test});
  }
  return t;
}

ResultTable ExperimentSuite::ablate_transfer() {
  ResultTable t{"Transfer learning ablation", "initialization", {}};
  TrainConfig none = base_;
  none.transfer = TransferMode::none;
  TrainConfig enc = base_;
  enc.transfer = TransferMode::encoder;
  t.rows.push_back({"random init", run("no_transfer", none, "mixed").result.log.test});
  t.rows.push_back({"pretext transfer", run("transfer", enc, "mixed").result.log.test});
  return t;
}

ResultTable ExperimentSuite::ablate_centers() {
  ResultTable t{"Center ablation", "train -> test", {}};
  t.rows.push_back({"random -> random", run("mixed", base_, "mixed").result.log.test});
  Run& c1 = run("center1", base_, "center1");
  Run& c2 = run("center2", base_, "center2");
  t.rows.push_back({"1 -> 1", evaluate(c1, "center1")});
  t.rows.push_back({"1 -> 2", evaluate(c1, "center2")});
  t.rows.push_back({"2 -> 1", evaluate(c2, "center1")});
  t.rows.push_back({"2 -> 2", evaluate(c2, "center2")});
  return t;
}

ResultTable ExperimentSuite::compare_baseline() {
  ResultTable t{"Baseline comparison", "model", {}};
  TrainConfig unet = base_;
  UNetBaselineConfig uc;
  uc.height = base_.model.value("height", uc.height);
  uc.width = base_.model.value("width", uc.width);
  uc.classes = base_.model.value("classes", uc.classes);
  if (base_.model.value("kind", std::string("swin_unet")) == "unet") {
    uc = base_.model.get<UNetBaselineConfig>();
  }
  unet.model = uc;
  unet.transfer = TransferMode::none;
  TrainConfig swin = base_;
  if (swin.model.value("kind", std::string("swin_unet")) != "swin_unet") {
    SwinUnetConfig sc = SwinUnetConfig::desk();
    sc.height = uc.height;
    sc.width = uc.width;
    sc.classes = uc.classes;
    swin.model = sc;
  }
  t.rows.push_back({"U-Net", run("unet", unet, "mixed").result.log.test});
  t.rows.push_back({"Swin-Unet", run("swin_unet", swin, "mixed").result.log.test});
  return t;
}

nlohmann::json ExperimentSuite::summary() const {
  nlohmann::json runs = nlohmann::json::object();
  for (const auto& [key, r] : runs_) {
    nlohmann::json evals = nlohmann::json::object();
    for (const auto& [data, report] : r->evals) evals[data] = to_json(report);
    runs[r->name] = {{"data", r->data},
                     {"epoch_loss", r->result.log.epoch_loss},
                     {"evals", evals}};
  }
  nlohmann::json out = {{"runs", runs}};
  if (pretext_) out["pretext_loss"] = pretext_->epoch_loss;
  return out;
}

}  // namespace swinseg
