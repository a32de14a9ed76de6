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
#include "panda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panda/error.hpp"

namespace panda::metrics {
namespace {

void CheckLabels(std::span<const std::size_t> labels, std::size_t num_classes) {
  for (std::size_t y : labels) {
    if (y >= num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label " + std::to_string(y) + " >= " + std::to_string(num_classes));
    }
  }
}

}  // namespace

LabelDistribution GroundTruthDist(std::span<const std::size_t> labels, std::size_t num_classes) {
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no labels");
  const auto counts = PredictionHistogram(labels, num_classes);
  LabelDistribution q{std::vector<double>(num_classes)};
  for (std::size_t c = 0; c < num_classes; ++c) {
    q.probs[c] = static_cast<double>(counts[c]) / static_cast<double>(labels.size());
  }
  return q;
}

Vector Softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::kEmptyInput, "no logits");
  for (double l : logits) {
    if (!std::isfinite(l)) throw Error(ErrorCode::kNonFiniteLogits, "logit is not finite");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector p(logits.size());
  double z = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - top);
    z += p[c];
  }
  for (double& x : p) x /= z;
  return p;
}

SoftPredictionDistribution SoftPredDist(std::span<const Vector> logits) {
  if (logits.empty()) throw Error(ErrorCode::kEmptyInput, "no logit rows");
  const std::size_t num_classes = logits.front().size();
  SoftPredictionDistribution out{std::vector<double>(num_classes, 0.0)};
  for (const Vector& row : logits) {
    if (row.size() != num_classes) throw Error(ErrorCode::kDimensionMismatch, "ragged logits");
    const Vector p = Softmax(row);
    for (std::size_t c = 0; c < num_classes; ++c) out.probs[c] += p[c];
  }
  for (double& x : out.probs) x /= static_cast<double>(logits.size());
  return out;
}

double L1Distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()) + " classes");
  }
  double d = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) d += std::abs(p[c] - q[c]);
  return d;
}

std::vector<std::uint64_t> PredictionHistogram(std::span<const std::size_t> predictions,
                                               std::size_t num_classes) {
  CheckLabels(predictions, num_classes);
  std::vector<std::uint64_t> counts(num_classes, 0);
  for (std::size_t y : predictions) ++counts[y];
  return counts;
}

}  // namespace panda::metrics
