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
#include <span>
#include <vector>

#include "panda/debias.hpp"

namespace panda::metrics {

struct LabelDistribution {
  std::vector<double> probs;
};

struct SoftPredictionDistribution {
  std::vector<double> probs;
};

/// Empirical class frequencies. Throws EmptyInput / LabelOutOfRange.
LabelDistribution GroundTruthDist(std::span<const std::size_t> labels, std::size_t num_classes);

/// Mean of the per-row softmax of the given logits (row-major N x C).
SoftPredictionDistribution SoftPredDist(std::span<const Vector> logits);

/// Softmax with max subtraction. Throws NonFiniteLogits.
Vector Softmax(std::span<const double> logits);

/// sum_c |p_c - q_c|, in [0, 2].
double L1Distance(std::span<const double> p, std::span<const double> q);
inline double L1Distance(const SoftPredictionDistribution& p, const LabelDistribution& q) {
  return L1Distance(p.probs, q.probs);
}

std::vector<std::uint64_t> PredictionHistogram(std::span<const std::size_t> predictions,
                                               std::size_t num_classes);

}  // namespace panda::metrics
