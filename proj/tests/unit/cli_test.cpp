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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "swinseg/datagen.hpp"
#include "swinseg/pgm.hpp"

namespace swinseg {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(SWINSEG_CLI) + " " + args + " -q > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("cli"));
    std::ofstream(*dir_ / "tiny.json") << R"({"model": {"embed_dim": 12}, "epochs": 1,
      "batch_size": 4, "data": {"count": 12}})";
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string path(const std::string& rel) { return (*dir_ / rel).string(); }
  static fs::path* dir_;
};
fs::path* Cli::dir_ = nullptr;

TEST_F(Cli, GenerateTrainEvaluatePredict) {
  ASSERT_EQ(run("gen-data --config " + path("tiny.json") + " --count 12 --seed 3 --out " + path("data")), 0);
  const auto manifest = read_manifest(path("data/manifest.json"));
  EXPECT_EQ(manifest.records.size(), 12u);
  EXPECT_EQ(manifest.seed, 3u);

  ASSERT_EQ(run("train --config " + path("tiny.json") + " --manifest " + path("data/manifest.json") +
                " --out " + path("run")),
            0);
  const auto log = nlohmann::json::parse(slurp(path("run/runlog.json")));
  EXPECT_EQ(log.at("epoch_loss").size(), 1u);

  ASSERT_EQ(run("eval --checkpoint " + path("run/model.ckpt") + " --manifest " +
                path("data/manifest.json") + " --out " + path("eval")),
            0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(path("eval/metrics.json"))).contains("dsc"));

  ASSERT_EQ(run("predict --checkpoint " + path("run/model.ckpt") + " --manifest " +
                path("data/manifest.json") + " --out " + path("pred")),
            0);
  std::size_t masks = 0;
  for (const auto& e : fs::directory_iterator(path("pred"))) {
    const auto m = read_pgm8(e.path());
    EXPECT_EQ(m.width, 128);
    for (auto v : m.labels) EXPECT_LT(v, 3);
    ++masks;
  }
  EXPECT_EQ(masks, manifest.count("test"));

  const auto& r = manifest.records.front();
  ASSERT_EQ(run("predict --checkpoint " + path("run/model.ckpt") + " --stir " + path("data/" + r.paths.stir) +
                " --t1 " + path("data/" + r.paths.t1) + " --t2 " + path("data/" + r.paths.t2) +
                " --out " + path("single")),
            0);
  EXPECT_TRUE(fs::exists(path("single/prediction.pgm")));
}

TEST_F(Cli, ComplexityTables) {
  ASSERT_EQ(run("complexity --preset paper --out " + path("cx")), 0);
  const auto csv = slurp(path("cx/complexity.csv"));
  EXPECT_NE(csv.find("\"2,003,828,736\""), std::string::npos);
  EXPECT_TRUE(fs::exists(path("cx/complexity.txt")));
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("train --config " + path("nope.json") + " --out " + path("x")), 2);
  std::ofstream(path("broken.json")) << "{ \"epochs\": ";
  EXPECT_EQ(run("train --config " + path("broken.json") + " --out " + path("x")), 2);
  std::ofstream(path("neg.json")) << R"({"batch_size": 0})";
  EXPECT_EQ(run("train --config " + path("neg.json") + " --out " + path("x")), 2);
  EXPECT_EQ(run("train --no-such-flag"), 2);
  EXPECT_EQ(run("complexity --preset huge --out " + path("x")), 2);
}

TEST_F(Cli, DataErrorsExitThree) {
  std::ofstream(path("junk.ckpt")) << "not a checkpoint";
  std::ofstream(path("empty_manifest.json")) << R"({"version": 1, "seed": 0, "records": []})";
  EXPECT_EQ(run("eval --checkpoint " + path("junk.ckpt") + " --manifest " + path("empty_manifest.json") +
                " --out " + path("x")),
            3);
  EXPECT_EQ(run("train --config " + path("tiny.json") + " --manifest " + path("no/manifest.json") +
                " --out " + path("x")),
            3);
}

TEST_F(Cli, DivergenceExitsFour) {
  std::ofstream(path("wild.json")) << R"({"model": {"embed_dim": 12}, "epochs": 3,
    "batch_size": 4, "learning_rate": 1e30, "data": {"count": 12}})";
  ASSERT_EQ(run("gen-data --config " + path("wild.json") + " --out " + path("wild_data")), 0);
  EXPECT_EQ(run("train --config " + path("wild.json") + " --manifest " + path("wild_data/manifest.json") +
                " --out " + path("wild_run")),
            4);
}

}  // namespace
}  // namespace swinseg
