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
#include <numeric>

#include "error_code.hpp"
#include "gradient_check.hpp"
#include "panda/adapt.hpp"
#include "panda/experiment.hpp"
#include "tent_reference.hpp"
#include "test_support.hpp"

namespace panda::adapt {
namespace {

using testing::CodeOf;

class AdaptTest : public ::testing::Test {
 protected:
  void SetUp() override { w_ = world::MakeWorld(testing::SmallSpec()); }

  std::vector<ImageTensor> Batch(std::size_t n, std::uint64_t seed, std::size_t domain = 1) {
    std::vector<ImageTensor> out;
    for (auto& item : world::SampleStream(w_, n, domain, seed)) out.push_back(item.image);
    return out;
  }

  AdaptState State(double beta, std::size_t m, Ablation ablation = Ablation::kFull) {
    AdaptState s = AdaptState::Initial(w_.encoder);
    s.beta = beta;
    s.m = m;
    s.ablation = ablation;
    s.patch_size = w_.spec.patch_size;
    return s;
  }

  world::World w_;
};

TEST(SoftmaxEntropyTest, Examples) {
  EXPECT_NEAR(SoftmaxEntropy(Vector(10, 3.0)), std::log(10.0), 1e-15);
  Vector peaked(5, 0.0);
  peaked[2] = 1e4;
  EXPECT_LT(SoftmaxEntropy(peaked), 1e-6);
  EXPECT_EQ(CodeOf([] { SoftmaxEntropy(Vector{0.0, NAN}); }), ErrorCode::kNonFiniteLogits);
}

TEST(SoftmaxEntropyTest, ExtendedPrecisionOracle) {
  Rng rng(50);
  for (int trial = 0; trial < 200; ++trial) {
    Vector l(2 + trial % 9);
    for (double& x : l) x = std::normal_distribution<double>(0, 1 + trial % 20)(rng);
    long double z = 0, top = *std::max_element(l.begin(), l.end());
    for (double x : l) z += std::exp(x - top);
    long double h = 0;
    for (double x : l) {
      const long double lp = x - top - std::log(z);
      h -= std::exp(lp) * lp;
    }
    EXPECT_NEAR(SoftmaxEntropy(l), static_cast<double>(h), 1e-10);
  }
}

TEST(AblationTest, Names) {
  for (auto a : {Ablation::kFull, Ablation::kNoPanda, Ablation::kPerImageShuffle,
                 Ablation::kNoAveraging}) {
    EXPECT_EQ(ParseAblation(AblationName(a)), a);
  }
  EXPECT_EQ(CodeOf([] { ParseAblation("bogus"); }), ErrorCode::kInvalidArgument);
}

TEST_F(AdaptTest, StateValidation) {
  AdaptState s = State(-0.1, 1);
  EXPECT_EQ(CodeOf([&] { s.Validate(); }), ErrorCode::kInvalidArgument);
  s = State(0.5, 1);
  s.learning_rate = -1;
  EXPECT_EQ(CodeOf([&] { s.Validate(); }), ErrorCode::kInvalidArgument);
  s = State(0.5, 1);
  std::vector<ImageTensor> empty;
  EXPECT_EQ(CodeOf([&] { LossAndGrad(s, empty, empty, w_.encoder, w_.bank); }),
            ErrorCode::kEmptyBatch);
}

TEST_F(AdaptTest, ZeroBetaZeroMIsPlainTent) {
  const auto batch = Batch(9, 1);
  const auto plain = LossAndGrad(State(0.0, 0, Ablation::kNoPanda), batch, {}, w_.encoder, w_.bank);
  const auto full = LossAndGrad(State(0.0, 0), batch, {}, w_.encoder, w_.bank);
  EXPECT_EQ(full.loss, plain.loss);
  EXPECT_EQ(full.grad_gamma, plain.grad_gamma);
  EXPECT_EQ(full.grad_delta, plain.grad_delta);
  // With beta = 0 the negatives enter only through a zero-weighted path.
  const auto negs = GenerateNegatives(State(0.0, 3), batch, 7);
  ASSERT_EQ(negs.size(), 3u);
  const auto zero_beta = LossAndGrad(State(0.0, 3), batch, negs, w_.encoder, w_.bank);
  EXPECT_EQ(zero_beta.loss, plain.loss);
  EXPECT_EQ(zero_beta.grad_gamma, plain.grad_gamma);
  EXPECT_EQ(zero_beta.grad_delta, plain.grad_delta);
}

TEST_F(AdaptTest, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto gc = testing::RandomGradientCase(w_, seed);
    const auto check = testing::CheckGradient(gc, w_);
    EXPECT_LT(check.max_rel_error, 1e-4) << "seed " << seed;
  }
}

TEST_F(AdaptTest, GradientOptionsMatchFiniteDifferences) {
  auto gc = testing::RandomGradientCase(w_, 101);
  gc.state.beta = 0.7;
  for (bool renorm : {false, true}) {
    gc.state.renormalize = renorm;
    EXPECT_LT(testing::CheckGradient(gc, w_).max_rel_error, 1e-4);
  }
  gc.state.ablation = Ablation::kNoAveraging;
  gc.negatives.resize(1);
  EXPECT_LT(testing::CheckGradient(gc, w_).max_rel_error, 1e-4);
}

TEST_F(AdaptTest, StopPrototypeGradientDropsNegativePath) {
  auto gc = testing::RandomGradientCase(w_, 3);
  gc.state.beta = 0.6;
  const auto full = LossAndGrad(gc.state, gc.batch, gc.negatives, w_.encoder, w_.bank);
  gc.state.stop_prototype_grad = true;
  const auto stopped = LossAndGrad(gc.state, gc.batch, gc.negatives, w_.encoder, w_.bank);
  EXPECT_EQ(full.loss, stopped.loss);
  EXPECT_NE(full.grad_gamma, stopped.grad_gamma);
}

TEST_F(AdaptTest, DuplicatedBatchGivesSameLossAndGradient) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto batch = Batch(6, 20 + seed);
    const AdaptState s = State(0.5, 2);
    const std::vector<ImageTensor> negs = GenerateNegatives(s, batch, seed);
    std::vector<ImageTensor> doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    std::vector<ImageTensor> doubled_negs = negs;
    doubled_negs.insert(doubled_negs.end(), negs.begin(), negs.end());
    const auto single = LossAndGrad(s, batch, negs, w_.encoder, w_.bank);
    for (const auto& n : {negs, doubled_negs}) {
      const auto twice = LossAndGrad(s, doubled, n, w_.encoder, w_.bank);
      EXPECT_NEAR(twice.loss, single.loss, 1e-12);
      for (std::size_t k = 0; k < s.gamma.size(); ++k) {
        const double tol = 1e-12 * std::max(1.0, std::abs(single.grad_gamma[k]));
        EXPECT_NEAR(twice.grad_gamma[k], single.grad_gamma[k], tol);
        EXPECT_NEAR(twice.grad_delta[k], single.grad_delta[k], 1e-12);
      }
    }
  }
}

TEST_F(AdaptTest, ZeroLearningRateKeepsStateAndPredictsWithOffset) {
  AdaptState s = State(0.5, 2);
  s.learning_rate = 0.0;
  const auto stream = world::SampleStream(w_, 12, 1, 30);
  std::vector<ImageTensor> batch;
  std::vector<std::size_t> labels;
  for (const auto& item : stream) batch.push_back(item.image), labels.push_back(item.label);
  const auto step = AdaptStep(s, batch, labels, w_.encoder, w_.bank, 31);
  EXPECT_EQ(step.state.gamma, s.gamma);
  EXPECT_EQ(step.state.delta, s.delta);
  EXPECT_EQ(step.state.step_count, 1u);

  std::vector<Vector> v, n;
  for (const auto& img : batch) v.push_back(w_.encoder.Encode(img));
  for (const auto& img : GenerateNegatives(s, batch, 31)) n.push_back(w_.encoder.Encode(img));
  const auto d = Offset(EmbeddingBatch(v), MeanPrototype(n), 0.5);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(step.report.predictions[i], Predict(d.vectors[i], w_.bank));
  }
  EXPECT_EQ(step.report.encoder_forwards, 14u);
}

TEST_F(AdaptTest, PlainTentTrajectoryMatchesReferenceExactly) {
  AdaptState s = State(0.0, 0);
  s.learning_rate = 5e-3;
  const auto stream = world::SampleStream(w_, 50 * 8, 1, 40);
  const auto result = RunStream(s, stream, w_.encoder, w_.bank, 8, 80, 41);

  std::vector<std::vector<float>> images;
  for (const auto& item : stream) images.emplace_back(item.image.data().begin(), item.image.data().end());
  testing::TentReference ref(w_.encoder.projection(), w_.encoder.dim(), w_.bank.directions(), 5e-3);
  const auto trace = ref.Run(images, 8);
  EXPECT_EQ(trace.predictions, result.predictions);
  EXPECT_EQ(trace.gammas.back(), result.final_state.gamma);
  EXPECT_EQ(trace.deltas.back(), result.final_state.delta);
  EXPECT_NE(result.final_state.gamma, s.gamma);
}

TEST_F(AdaptTest, ForwardCountsPerAblation) {
  const auto batch = Batch(20, 50);
  auto forwards = [&](Ablation a, std::size_t m) {
    AdaptState s = State(0.5, m, a);
    return AdaptStep(s, batch, {}, w_.encoder, w_.bank, 1).report.encoder_forwards;
  };
  EXPECT_EQ(forwards(Ablation::kFull, 2), 22u);
  EXPECT_EQ(forwards(Ablation::kPerImageShuffle, 2), 22u);
  EXPECT_EQ(forwards(Ablation::kNoAveraging, 2), 21u);
  EXPECT_EQ(forwards(Ablation::kNoPanda, 2), 20u);
  EXPECT_EQ(forwards(Ablation::kFull, 0), 20u);
  // m is clamped to the batch size for short batches.
  EXPECT_EQ(forwards(Ablation::kFull, 50), 40u);
}

TEST_F(AdaptTest, SmallStepDecreasesLoss) {
  // Batches whose softmax is saturated have a first-order decrease below
  // double resolution of the loss. Those are skipped rather than counted.
  int failures = 0, checked = 0;
  for (std::uint64_t seed = 0; checked < 20; ++seed) {
    ASSERT_LT(seed, 200u);
    AdaptState s = State(0.5, 2);
    s.learning_rate = 1e-5;
    const auto batch = Batch(10, 60 + seed, 1 + seed % 2);
    const auto negs = GenerateNegatives(s, batch, seed);
    const double before = Loss(s, batch, negs, w_.encoder, w_.bank);
    const auto g = LossAndGrad(s, batch, negs, w_.encoder, w_.bank);
    AdaptState next = s;
    double predicted = 0.0;
    for (std::size_t k = 0; k < s.gamma.size(); ++k) {
      next.gamma[k] -= s.learning_rate * g.grad_gamma[k];
      next.delta[k] -= s.learning_rate * g.grad_delta[k];
      predicted += s.learning_rate * (g.grad_gamma[k] * g.grad_gamma[k] + g.grad_delta[k] * g.grad_delta[k]);
    }
    if (predicted < 1e-12 * before) continue;
    ++checked;
    failures += !(Loss(next, batch, negs, w_.encoder, w_.bank) < before);
  }
  EXPECT_LE(failures, 1);
}

TEST_F(AdaptTest, JointTextRescalingKeepsPredictions) {
  const auto batch = Batch(15, 70);
  AdaptState s = State(0.5, 2);
  s.learning_rate = 0.0;
  const auto base = AdaptStep(s, batch, {}, w_.encoder, w_.bank, 3).report.predictions;
  for (double scale : {1.0, 37.0, 250.0}) {
    s.logit_scale = scale;
    EXPECT_EQ(AdaptStep(s, batch, {}, w_.encoder, w_.bank, 3).report.predictions, base);
  }
}

TEST_F(AdaptTest, RunStreamChunks) {
  AdaptState s = State(0.5, 10);
  const auto stream = world::SampleStream(w_, 10'000, 1, 80);
  const auto result = RunStream(s, stream, w_.encoder, w_.bank, 100, 1000, 81);
  ASSERT_EQ(result.chunks.size(), 10u);
  EXPECT_EQ(result.batches, 100u);
  EXPECT_EQ(result.encoder_forwards, 11'000u);
  double acc = 0;
  for (const auto& c : result.chunks) {
    EXPECT_EQ(c.n, 1000u);
    acc += c.accuracy;
  }
  EXPECT_NEAR(acc / 10, result.overall.accuracy, 1e-12);
}

TEST_F(AdaptTest, SingleChunkIsMeanOfBatches) {
  AdaptState s = State(0.5, 2);
  const auto stream = world::SampleStream(w_, 200, 2, 90);
  const auto result = RunStream(s, stream, w_.encoder, w_.bank, 20, 200, 91);
  ASSERT_EQ(result.chunks.size(), 1u);
  AdaptState state = s;
  double acc = 0, entropy = 0;
  for (std::size_t b = 0; b < 10; ++b) {
    std::vector<ImageTensor> images;
    std::vector<std::size_t> labels;
    for (std::size_t i = b * 20; i < b * 20 + 20; ++i) {
      images.push_back(stream[i].image);
      labels.push_back(stream[i].label);
    }
    auto step = AdaptStep(state, images, labels, w_.encoder, w_.bank, SubstreamSeed(91, "nda", {b}));
    state = step.state;
    acc += step.report.accuracy;
    entropy += step.report.mean_entropy;
  }
  EXPECT_NEAR(result.chunks[0].accuracy, acc / 10, 1e-12);
  EXPECT_NEAR(result.chunks[0].mean_entropy, entropy / 10, 1e-12);
  EXPECT_EQ(result.final_state.gamma, state.gamma);
}

TEST_F(AdaptTest, ZeroLearningRateIsStatelessUnderBatchPermutation) {
  AdaptState s = State(0.5, 2);
  s.learning_rate = 0.0;
  const auto stream = world::SampleStream(w_, 120, 1, 95);
  std::vector<std::size_t> order(6);
  std::iota(order.begin(), order.end(), 0);
  auto predictions = [&](const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> all;
    AdaptState state = s;
    for (std::size_t b : perm) {
      std::vector<ImageTensor> images;
      for (std::size_t i = b * 20; i < b * 20 + 20; ++i) images.push_back(stream[i].image);
      auto step = AdaptStep(state, images, {}, w_.encoder, w_.bank, SubstreamSeed(96, "nda", {b}));
      state = step.state;
      all.insert(all.end(), step.report.predictions.begin(), step.report.predictions.end());
    }
    std::sort(all.begin(), all.end());
    return all;
  };
  const auto forward = predictions(order);
  std::reverse(order.begin(), order.end());
  EXPECT_EQ(predictions(order), forward);
  std::rotate(order.begin(), order.begin() + 2, order.end());
  EXPECT_EQ(predictions(order), forward);
}

TEST_F(AdaptTest, EmptyStream) {
  std::vector<world::LabeledImage> none;
  EXPECT_EQ(CodeOf([&] { RunStream(State(0.5, 1), none, w_.encoder, w_.bank, 10, 10, 0); }),
            ErrorCode::kEmptyStream);
}

TEST(AdaptDirectionTest, FullBeatsNoPandaOnBiasedWorld) {
  const world::World w = world::MakeWorld(world::WorldSpec{});
  experiment::SimulateConfig config;
  config.stream_len = 100 * 100;
  config.method = experiment::Method::kTentPanda;
  const auto full = experiment::Simulate(w, config);
  config.method = experiment::Method::kTent;
  const auto plain = experiment::Simulate(w, config);
  EXPECT_GE(full.chunks.back().accuracy, plain.chunks.back().accuracy);
  EXPECT_LT(full.chunks.back().l1_bias, plain.chunks.back().l1_bias);
}

}  // namespace
}  // namespace panda::adapt
