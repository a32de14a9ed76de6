// Copyright 2026 The PANDA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "error_code.hpp"
#include "panda/cli.hpp"
#include "panda/tns_io.hpp"
#include "test_support.hpp"

namespace panda::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  const auto bytes = io::ReadFileBytes(p);
  return std::string(bytes.begin(), bytes.end());
}

nlohmann::json ReadJson(const fs::path& p) { return nlohmann::json::parse(Slurp(p)); }

TEST(CliParseTest, HelpAndUsage) {
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"simulate", "--no-such-flag", "1"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"simulate", "--out-dir", "/tmp/x", "--method", "eta"}).code, kExitUsage);
}

TEST(CliParseTest, Lists) {
  EXPECT_EQ(SplitList("0, 1,2,,3"), (std::vector<std::string>{"0", "1", "2", "3"}));
  EXPECT_EQ(EvalBetaExpr("0.25", 0.6), 0.25);
  EXPECT_EQ(EvalBetaExpr("r", 0.6), 0.6);
  EXPECT_EQ(EvalBetaExpr("r/2", 0.6), 0.3);
  EXPECT_EQ(EvalBetaExpr("r+0.2", 0.6), 0.6 + 0.2);
  EXPECT_EQ(EvalBetaExpr("r-0.1", 0.6), 0.6 - 0.1);
  EXPECT_EQ(EvalBetaExpr("r*3", 0.2), 0.2 * 3);
  EXPECT_EQ(testing::CodeOf([] { EvalBetaExpr("q", 0.1); }), ErrorCode::kParseError);
  EXPECT_EQ(testing::CodeOf([] { EvalBetaExpr("r^2", 0.1); }), ErrorCode::kParseError);
}

TEST(VerifyTheoremCliTest, PreconditionsExitTwo) {
  EXPECT_EQ(Invoke({"verify-theorem", "--samples", "100"}).code, kExitUsage);
  const auto r1 = Invoke({"verify-theorem", "--r-grid", "1.0", "--samples", "10000"});
  EXPECT_EQ(r1.code, kExitUsage);
  EXPECT_NE(r1.err.find("CorrelationOutOfRange"), std::string::npos);
  EXPECT_EQ(Invoke({"verify-theorem", "--s-grid", "0", "--samples", "10000"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"verify-theorem", "--s-grid", "abc"}).code, kExitUsage);
}

TEST(VerifyTheoremCliTest, SmallGridPasses) {
  const auto r = Invoke({"verify-theorem", "--s-grid", "1,2", "--r-grid", "0,0.5", "--samples",
                         "200000", "--seed", "3"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "s,r,beta,analytic,mc_estimate,mc_stderr,pass");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 2 * 2 * 5);
}

TEST(VerifyTheoremCliTest, HighDimAndOutDir) {
  const auto dir = testing::ScratchDir("cli_verify");
  const auto r = Invoke({"verify-theorem", "--s-grid", "1", "--r-grid", "0.3", "--beta-grid",
                         "0,r", "--samples", "100000", "--dim", "8", "--out-dir", dir.string()});
  EXPECT_EQ(r.code, kExitOk);
  const auto m = ReadJson(dir / "manifest.json");
  EXPECT_EQ(m["subcommand"], "verify-theorem");
  EXPECT_EQ(m["flags"]["--dim"], "8");
  EXPECT_EQ(m["outputs"][0], "verify.csv");
}

class NdaCliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::ScratchDir("cli_nda");
    Rng rng(70);
    for (int i = 0; i < 100; ++i) {
      const auto p = dir_ / ("in_" + std::to_string(i) + ".tns");
      io::WriteTns(p, testing::RandomImage(64, 64, 3, rng));
      inputs_.push_back(p.string());
    }
  }

  std::vector<std::string> Args(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{"nda"};
    a.insert(a.end(), inputs_.begin(), inputs_.end());
    a.insert(a.end(), {"--out-dir", (dir_ / out).string()});
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }

  fs::path dir_;
  std::vector<std::string> inputs_;
};

TEST_F(NdaCliTest, DefaultsWriteTenNegatives) {
  ASSERT_EQ(Invoke(Args("a", {"--seed", "5"})).code, kExitOk);
  const auto m = ReadJson(dir_ / "a" / "manifest.json");
  EXPECT_EQ(m["outputs"].size(), 10u);
  EXPECT_EQ(m["inputs"].size(), 100u);
  EXPECT_EQ(m["flags"]["--m"], "auto");
  for (int j = 0; j < 10; ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "neg_%04d.tns", j);
    const auto img = io::ReadTns(dir_ / "a" / name);
    EXPECT_EQ(img.height(), 64u);
    EXPECT_EQ(img.channels(), 3u);
  }
  ASSERT_EQ(Invoke(Args("b", {"--seed", "5"})).code, kExitOk);
  EXPECT_EQ(Slurp(dir_ / "a" / "neg_0007.tns"), Slurp(dir_ / "b" / "neg_0007.tns"));
}

TEST_F(NdaCliTest, ZeroMWritesOnlyManifest) {
  ASSERT_EQ(Invoke(Args("z", {"--m", "0"})).code, kExitOk);
  const auto m = ReadJson(dir_ / "z" / "manifest.json");
  EXPECT_TRUE(m["outputs"].empty());
  EXPECT_EQ(std::distance(fs::directory_iterator(dir_ / "z"), fs::directory_iterator()), 1);
}

TEST_F(NdaCliTest, ErrorsNameTheFile) {
  const auto odd = dir_ / "odd.tns";
  io::WriteTns(odd, ImageTensor(64, 48, 3));
  auto r = Invoke({"nda", inputs_[0], odd.string(), "--out-dir", (dir_ / "e").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("odd.tns"), std::string::npos);
  r = Invoke({"nda", odd.string(), "--out-dir", (dir_ / "e").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("DimensionMismatch"), std::string::npos);
  EXPECT_NE(r.err.find("odd.tns"), std::string::npos);
  const auto junk = dir_ / "junk.tns";
  io::WriteTextFile(junk, "nope");
  r = Invoke({"nda", junk.string(), "--out-dir", (dir_ / "e").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("ParseError"), std::string::npos);
}

std::vector<std::string> SmallWorldFlags() {
  return {"--image-size", "16", "--channels", "2", "--feature-dim", "7", "--num-classes", "4",
          "--patch-size", "4"};
}

std::vector<std::string> SimArgs(const fs::path& out, std::vector<std::string> extra) {
  std::vector<std::string> a{"simulate", "--out-dir", out.string(), "--stream-len", "400",
                             "--chunk-size", "100", "--batch-size", "40"};
  for (auto& f : SmallWorldFlags()) a.push_back(f);
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

TEST(SimulateCliTest, WritesReportsAndManifest) {
  const auto dir = testing::ScratchDir("cli_sim");
  const auto r = Invoke(SimArgs(dir / "run", {"--seed", "4"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"report.json", "report.csv", "histogram.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  const auto report = ReadJson(dir / "run" / "report.json");
  EXPECT_EQ(report["per_chunk"].size(), 4u);
  EXPECT_TRUE(report["final"].contains("accuracy"));
  const auto m = ReadJson(dir / "run" / "manifest.json");
  for (const char* key : {"subcommand", "tool_version", "seed", "flags", "inputs", "outputs",
                          "wall_time_seconds"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_EQ(m["seed"], 4);
  EXPECT_EQ(m["flags"]["--lr"], "0.001");
  EXPECT_FALSE(m["flags"].contains("--out-dir"));
}

TEST(SimulateCliTest, EmptyStreamExitsTwo) {
  const auto dir = testing::ScratchDir("cli_sim_empty");
  const auto r = Invoke({"simulate", "--stream-len", "0", "--out-dir", dir.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("EmptyStream"), std::string::npos);
}

TEST(SimulateCliTest, ZeroShotBetaIsIrrelevant) {
  const auto dir = testing::ScratchDir("cli_zero_shot");
  ASSERT_EQ(Invoke(SimArgs(dir / "a", {"--method", "zero_shot", "--beta", "0"})).code, kExitOk);
  ASSERT_EQ(Invoke(SimArgs(dir / "b", {"--method", "zero_shot", "--ablation", "no_panda"})).code, kExitOk);
  ASSERT_EQ(Invoke(SimArgs(dir / "c", {"--method", "panda_only", "--beta", "0"})).code, kExitOk);
  EXPECT_EQ(Slurp(dir / "a" / "report.csv"), Slurp(dir / "b" / "report.csv"));
  auto accuracy_column = [&](const fs::path& p) {
    std::vector<double> acc;
    for (const auto& c : ReadJson(p)["per_chunk"]) acc.push_back(c["accuracy"]);
    return acc;
  };
  EXPECT_EQ(accuracy_column(dir / "a" / "report.json"), accuracy_column(dir / "c" / "report.json"));
}

TEST(SimulateCliTest, ReplayIsByteIdenticalAcrossThreads) {
  const auto dir = testing::ScratchDir("cli_replay");
  ASSERT_EQ(Invoke(SimArgs(dir / "orig", {"--seed", "9", "--threads", "1"})).code, kExitOk);
  ASSERT_EQ(Invoke({"--threads", "4", "replay", (dir / "orig" / "manifest.json").string(),
                    "--out-dir", (dir / "again").string()})
                .code,
            kExitOk);
  for (const char* f : {"report.json", "report.csv", "histogram.csv"}) {
    EXPECT_EQ(Slurp(dir / "orig" / f), Slurp(dir / "again" / f)) << f;
  }
}

TEST(WorldCliTest, MakeInspectAndSimulateFromDir) {
  const auto dir = testing::ScratchDir("cli_world");
  std::vector<std::string> make{"world-make", "--out-dir", (dir / "w").string(), "--seed", "2"};
  for (auto& f : SmallWorldFlags()) make.push_back(f);
  ASSERT_EQ(Invoke(make).code, kExitOk);
  const auto inspect = Invoke({"world-inspect", "--world-dir", (dir / "w").string(), "--samples", "100"});
  ASSERT_EQ(inspect.code, kExitOk);
  const auto j = nlohmann::json::parse(inspect.out);
  EXPECT_EQ(j["spec"]["feature_dim"], 7);
  EXPECT_EQ(j["domains"].size(), 4u);
  EXPECT_EQ(j["domains"][0]["zero_shot_accuracy"], 1.0);

  ASSERT_EQ(Invoke({"simulate", "--world-dir", (dir / "w").string(), "--stream-len", "200",
                    "--chunk-size", "100", "--batch-size", "40", "--out-dir", (dir / "s1").string(),
                    "--seed", "2"}).code,
            kExitOk);
  ASSERT_EQ(Invoke(SimArgs(dir / "s2", {"--seed", "2", "--stream-len", "200"})).code, kExitOk);
  EXPECT_EQ(Slurp(dir / "s1" / "report.csv"), Slurp(dir / "s2" / "report.csv"));
  EXPECT_EQ(Invoke({"world-inspect", "--world-dir", (dir / "missing").string()}).code, kExitUsage);
}

TEST(SweepCliTest, WritesCsv) {
  const auto dir = testing::ScratchDir("cli_sweep");
  std::vector<std::string> a{"sweep", "--out-dir", dir.string(), "--stream-len", "200",
                             "--betas", "0,0.5", "--m-ratios", "0.1", "--batch-sizes", "20,50"};
  for (auto& f : SmallWorldFlags()) a.push_back(f);
  ASSERT_EQ(Invoke(a).code, kExitOk);
  const auto csv = Slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  ASSERT_EQ(Invoke({"replay", (dir / "manifest.json").string(), "--out-dir", (dir / "r").string()}).code,
            kExitOk);
  EXPECT_EQ(Slurp(dir / "r" / "sweep.csv"), csv);
}

}  // namespace
}  // namespace panda::cli
