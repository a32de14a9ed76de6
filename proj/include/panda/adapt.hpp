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
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panda/debias.hpp"
#include "panda/tensor.hpp"
#include "panda/world.hpp"

namespace panda::adapt {

enum class Ablation {
  kFull,             // batch-shared pool, mean prototype
  kNoPanda,          // plain Tent: no negatives, no offset
  kPerImageShuffle,  // each negative shuffles a single image
  kNoAveraging,      // one random negative instead of the mean
};

std::string_view AblationName(Ablation a);
/// Throws InvalidArgument on unknown names.
Ablation ParseAblation(std::string_view name);

inline constexpr double kDefaultLearningRate = 1e-3;
inline constexpr double kDefaultBeta = 0.5;

/// Trainable affine parameters of the encoder plus the run configuration.
struct AdaptState {
  Vector gamma;
  Vector delta;
  double learning_rate = kDefaultLearningRate;
  std::uint64_t step_count = 0;
  double beta = kDefaultBeta;
  std::size_t m = 0;
  Ablation ablation = Ablation::kFull;
  std::size_t patch_size = 8;
  /// Treat the prototype as a constant in the backward pass.
  bool stop_prototype_grad = false;
  /// Renormalise d_i before the logits.
  bool renormalize = false;
  double logit_scale = kLogitScale;

  /// gamma = 1, delta = 0 for the given encoder.
  static AdaptState Initial(const world::FrozenEncoder& encoder);

  /// Throws InvalidArgument.
  void Validate() const;

  /// True when negatives are generated and the offset is applied.
  bool UsesPanda() const { return ablation != Ablation::kNoPanda && m > 0; }
};

struct BatchReport {
  std::vector<std::size_t> predictions;
  /// Debiased logits, computed before the parameter update.
  std::vector<Vector> logits;
  std::vector<double> entropies;
  double mean_entropy = 0.0;
  double accuracy = 0.0;
  double l1_bias = 0.0;
  std::size_t encoder_forwards = 0;
};

/// Shannon entropy (nats) of softmax(logits). Throws NonFiniteLogits.
double SoftmaxEntropy(std::span<const double> logits);

struct LossGrad {
  double loss = 0.0;
  Vector grad_gamma;
  Vector grad_delta;
};

/// Mean entropy of the debiased logits and its exact gradient with respect
/// to (gamma, delta). The negatives are encoded with the same parameters and
/// the gradient flows through the prototype unless stop_prototype_grad.
/// An empty negatives span (or kNoPanda) means d_i = v_i.
LossGrad LossAndGrad(const AdaptState& state, std::span<const ImageTensor> batch,
                     std::span<const ImageTensor> negatives,
                     const world::FrozenEncoder& encoder, const TextBank& bank);

/// Loss only; same forward as LossAndGrad.
double Loss(const AdaptState& state, std::span<const ImageTensor> batch,
            std::span<const ImageTensor> negatives, const world::FrozenEncoder& encoder,
            const TextBank& bank);

/// Negatives for one batch under the state's ablation switch.
std::vector<ImageTensor> GenerateNegatives(const AdaptState& state,
                                           std::span<const ImageTensor> batch,
                                           std::uint64_t seed);

struct StepResult {
  AdaptState state;
  BatchReport report;
};

/// One iteration of entropy-minimisation adaptation with prototype offset:
/// negatives, encode, prototype, offset, logits, loss, SGD update. The
/// report's predictions come from the pre-update debiased features.
/// labels may be empty, in which case accuracy is left at 0.
StepResult AdaptStep(const AdaptState& state, std::span<const ImageTensor> batch,
                     std::span<const std::size_t> labels, const world::FrozenEncoder& encoder,
                     const TextBank& bank, std::uint64_t nda_seed);

struct ChunkReport {
  std::size_t chunk_index = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  double l1_bias = 0.0;
  double mean_entropy = 0.0;
};

struct StreamResult {
  std::vector<ChunkReport> chunks;
  /// Whole-stream aggregate.
  ChunkReport overall;
  std::vector<std::size_t> predictions;
  std::size_t encoder_forwards = 0;
  std::size_t batches = 0;
  AdaptState final_state;
};

/// Sequential adaptation over consecutive batches of the stream, with
/// per-chunk accuracy, L1 bias and entropy in stream order. Batch t uses the
/// NDA seed SubstreamSeed(seed, "nda", {t}). Throws EmptyStream.
StreamResult RunStream(const AdaptState& state, std::span<const world::LabeledImage> stream,
                       const world::FrozenEncoder& encoder, const TextBank& bank,
                       std::size_t batch_size, std::size_t chunk_size, std::uint64_t seed);

}  // namespace panda::adapt
