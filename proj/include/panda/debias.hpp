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
#include <span>
#include <string>
#include <vector>

namespace panda {

using Vector = std::vector<double>;

/// CLIP-style logit temperature.
inline constexpr double kLogitScale = 100.0;
inline constexpr double kUnitTolerance = 1e-6;

/// Unit-norm image features for one batch.
class EmbeddingBatch {
 public:
  EmbeddingBatch() = default;
  /// Throws NotUnitVector / DimensionMismatch.
  explicit EmbeddingBatch(std::vector<Vector> vectors);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<Vector>& vectors() const { return vectors_; }
  const Vector& operator[](std::size_t i) const { return vectors_[i]; }

 private:
  std::vector<Vector> vectors_;
  std::size_t dim_ = 0;
};

struct NegativePrototype {
  Vector mean;
  std::size_t m_used = 0;
};

class TextBank {
 public:
  TextBank() = default;
  /// Requires >= 2 unit-norm directions of equal dimension. Empty names are
  /// replaced by "class_<i>".
  TextBank(std::vector<Vector> directions, std::vector<std::string> class_names = {});

  std::size_t num_classes() const { return directions_.size(); }
  std::size_t dim() const { return directions_.empty() ? 0 : directions_.front().size(); }
  const Vector& operator[](std::size_t c) const { return directions_[c]; }
  const std::vector<Vector>& directions() const { return directions_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  std::vector<Vector> directions_;
  std::vector<std::string> class_names_;
};

/// d_i = v_i - beta * n_bar. Not renormalized unless asked.
struct DebiasedBatch {
  std::vector<Vector> vectors;
  double beta = 0.0;
};

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);

/// raw / ||raw||. Throws ZeroVector.
Vector Normalize(std::span<const double> raw);

/// Componentwise mean. Throws EmptyNegatives.
NegativePrototype MeanPrototype(std::span<const Vector> negatives);

DebiasedBatch Offset(const EmbeddingBatch& batch, const NegativePrototype& proto, double beta,
                     bool renormalize = false);

/// Same arithmetic on arbitrary (not necessarily unit) vectors.
std::vector<Vector> OffsetVectors(std::span<const Vector> vectors, const NegativePrototype& proto,
                                  double beta);

/// scale * <d, t_c> for every class.
Vector Logits(std::span<const double> d, const TextBank& bank, double scale = kLogitScale);

/// argmax_c <d, t_c>; ties go to the lowest index.
std::size_t Predict(std::span<const double> d, const TextBank& bank);

/// Lowest index of the maximum.
std::size_t ArgMax(std::span<const double> values);

}  // namespace panda
