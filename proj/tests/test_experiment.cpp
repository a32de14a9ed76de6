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

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "error_code.hpp"
#include "panda/experiment.hpp"
#include "test_support.hpp"

namespace panda::experiment {
namespace {

using testing::CodeOf;

SimulateConfig SmallConfig(Method method) {
  SimulateConfig c;
  c.method = method;
  c.stream_len = 600;
  c.batch_size = 50;
  c.chunk_size = 200;
  return c;
}

TEST(MethodTest, Names) {
  for (auto m : {Method::kZeroShot, Method::kPandaOnly, Method::kTent, Method::kTentPanda}) {
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  }
  EXPECT_EQ(CodeOf([] { ParseMethod("eta"); }), ErrorCode::kInvalidArgument);
}

TEST(InitialStateTest, MethodsMapToSwitches) {
  const auto w = world::MakeWorld(testing::SmallSpec());
  const auto zs = InitialState(w, SmallConfig(Method::kZeroShot));
  EXPECT_EQ(zs.learning_rate, 0.0);
  EXPECT_FALSE(zs.UsesPanda());
  const auto po = InitialState(w, SmallConfig(Method::kPandaOnly));
  EXPECT_EQ(po.learning_rate, 0.0);
  EXPECT_EQ(po.m, 5u);
  const auto tent = InitialState(w, SmallConfig(Method::kTent));
  EXPECT_EQ(tent.m, 0u);
  EXPECT_EQ(tent.beta, 0.0);
  EXPECT_GT(tent.learning_rate, 0.0);
  auto cfg = SmallConfig(Method::kTentPanda);
  cfg.m = 3;
  EXPECT_EQ(InitialState(w, cfg).m, 3u);
}

TEST(SimulateTest, EmptyStream) {
  const auto w = world::MakeWorld(testing::SmallSpec());
  auto cfg = SmallConfig(Method::kTent);
  cfg.stream_len = 0;
  EXPECT_EQ(CodeOf([&] { Simulate(w, cfg); }), ErrorCode::kEmptyStream);
}

TEST(SimulateTest, ZeroShotIgnoresBetaAndMatchesZeroBetaOffset) {
  const auto w = world::MakeWorld(testing::SmallSpec());
  auto zs = SmallConfig(Method::kZeroShot);
  const auto a = Simulate(w, zs);
  zs.beta = 0.9;
  EXPECT_EQ(Simulate(w, zs).predictions, a.predictions);
  auto po = SmallConfig(Method::kPandaOnly);
  po.beta = 0.0;
  const auto b = Simulate(w, po);
  EXPECT_EQ(b.predictions, a.predictions);
  for (std::size_t c = 0; c < a.chunks.size(); ++c) EXPECT_EQ(b.chunks[c].accuracy, a.chunks[c].accuracy);
}

TEST(SimulateTest, PairedRunsShareTheStream) {
  const auto w = world::MakeWorld(testing::SmallSpec());
  const auto tent = Simulate(w, SmallConfig(Method::kTent));
  const auto panda = Simulate(w, SmallConfig(Method::kTentPanda));
  ASSERT_EQ(tent.chunks.size(), panda.chunks.size());
  for (std::size_t c = 0; c < tent.chunks.size(); ++c) {
    EXPECT_EQ(tent.chunks[c].chunk_index, panda.chunks[c].chunk_index);
    EXPECT_EQ(tent.chunks[c].n, panda.chunks[c].n);
  }
  EXPECT_EQ(panda.encoder_forwards * 10, tent.encoder_forwards * 11);
}

TEST(ReportTest, JsonAndCsvShapes) {
  const auto w = world::MakeWorld(testing::SmallSpec());
  const auto cfg = SmallConfig(Method::kTentPanda);
  const auto result = Simulate(w, cfg);
  const auto j = nlohmann::json::parse(ReportJson(w, cfg, result));
  EXPECT_EQ(j["per_chunk"].size(), 3u);
  EXPECT_EQ(j["final"]["encoder_forwards"], result.encoder_forwards);
  EXPECT_EQ(j["final"]["accuracy"].get<double>(), result.overall.accuracy);
  EXPECT_EQ(j["config"]["method"], "tent_panda");
  const auto csv = ReportCsv(result);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "chunk_index,n,accuracy,l1_bias,mean_entropy");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto hist = HistogramCsv(result, 4);
  EXPECT_EQ(hist.substr(0, hist.find('\n')), "class_index,count");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 5);
}

TEST(FormatNumberTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(1.0), "1");
  EXPECT_EQ(std::stod(FormatNumber(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(SweepTest, GridRows) {
  const auto w = world::MakeWorld(testing::SmallSpec());
  SweepConfig sc;
  sc.base = SmallConfig(Method::kTentPanda);
  sc.base.stream_len = 200;
  sc.betas = {0.0, 0.5};
  sc.m_ratios = {0.1, 0.3};
  sc.batch_sizes = {20, 50};
  const auto rows = Sweep(w, sc);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.m, static_cast<std::size_t>(std::ceil(r.batch_size * r.m_ratio - 1e-9)));
    EXPECT_EQ(r.encoder_forwards, 200 + (200 / r.batch_size) * r.m);
  }
  const auto csv = SweepCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "batch_size,beta,m_ratio,m,accuracy,l1_bias,mean_entropy,final_chunk_accuracy,"
            "encoder_forwards");
}

}  // namespace
}  // namespace panda::experiment
