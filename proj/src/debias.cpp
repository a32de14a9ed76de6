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
#include "panda/debias.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "panda/error.hpp"

namespace panda {
namespace {

void CheckUnit(std::span<const double> v, const char* what) {
  if (std::abs(Norm(v) - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kNotUnitVector, std::string(what) + " is not unit norm");
  }
}

}  // namespace

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

Vector Normalize(std::span<const double> raw) {
  const double n = Norm(raw);
  if (!(n > 0.0)) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  Vector out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k] / n;
  return out;
}

EmbeddingBatch::EmbeddingBatch(std::vector<Vector> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) return;
  dim_ = vectors_.front().size();
  for (const Vector& v : vectors_) {
    if (v.size() != dim_) throw Error(ErrorCode::kDimensionMismatch, "ragged embedding batch");
    CheckUnit(v, "embedding");
  }
}

TextBank::TextBank(std::vector<Vector> directions, std::vector<std::string> class_names)
    : directions_(std::move(directions)), class_names_(std::move(class_names)) {
  if (directions_.size() < 2) {
    throw Error(ErrorCode::kInvalidSpec, "text bank needs at least two classes");
  }
  for (const Vector& t : directions_) {
    if (t.size() != directions_.front().size()) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged text bank");
    }
    CheckUnit(t, "text embedding");
  }
  if (class_names_.empty()) {
    for (std::size_t c = 0; c < directions_.size(); ++c) {
      class_names_.push_back("class_" + std::to_string(c));
    }
  }
  if (class_names_.size() != directions_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "class name count differs from bank size");
  }
}

NegativePrototype MeanPrototype(std::span<const Vector> negatives) {
  if (negatives.empty()) throw Error(ErrorCode::kEmptyNegatives, "no negative embeddings");
  const std::size_t dim = negatives.front().size();
  Vector mean(dim, 0.0);
  for (const Vector& n : negatives) {
    if (n.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "ragged negatives");
    for (std::size_t k = 0; k < dim; ++k) mean[k] += n[k];
  }
  const double inv = 1.0 / static_cast<double>(negatives.size());
  for (double& x : mean) x *= inv;
  return {std::move(mean), negatives.size()};
}

std::vector<Vector> OffsetVectors(std::span<const Vector> vectors, const NegativePrototype& proto,
                                  double beta) {
  if (!std::isfinite(beta)) throw Error(ErrorCode::kInvalidArgument, "beta must be finite");
  std::vector<Vector> out;
  out.reserve(vectors.size());
  for (const Vector& v : vectors) {
    if (v.size() != proto.mean.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "embedding and prototype dimensions differ");
    }
    Vector d(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) d[k] = v[k] - beta * proto.mean[k];
    out.push_back(std::move(d));
  }
  return out;
}

DebiasedBatch Offset(const EmbeddingBatch& batch, const NegativePrototype& proto, double beta,
                     bool renormalize) {
  DebiasedBatch out{OffsetVectors(batch.vectors(), proto, beta), beta};
  if (renormalize) {
    for (Vector& d : out.vectors) d = Normalize(d);
  }
  return out;
}

Vector Logits(std::span<const double> d, const TextBank& bank, double scale) {
  if (d.size() != bank.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature dim " + std::to_string(d.size()) + " vs bank dim " +
                    std::to_string(bank.dim()));
  }
  Vector out(bank.num_classes());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = scale * Dot(d, bank[c]);
  return out;
}

std::size_t ArgMax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[best]) best = c;
  }
  return best;
}

std::size_t Predict(std::span<const double> d, const TextBank& bank) {
  return ArgMax(Logits(d, bank, 1.0));
}

}  // namespace panda
