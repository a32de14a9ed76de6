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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "panda/debias.hpp"
#include "panda/tensor.hpp"

namespace panda::world {

/// Parameters of the synthetic classification world.
///
/// Class signal is a low-frequency global cosine layout per class, which
/// patch shuffling scrambles. Corruption is a per-domain constant colour
/// shift plus i.i.d. pixel texture, which patch shuffling preserves.
struct WorldSpec {
  std::size_t num_classes = 10;
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t feature_dim = 16;
  double corruption_strength = 1.5;
  /// Cosine between the corruption feature axis and class 0's text direction.
  double spurious_align = 0.8;
  std::uint64_t seed = 0;
  std::size_t patch_size = 8;
  std::size_t num_domains = 3;

  /// Throws InvalidSpec.
  void Validate() const;
  friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

/// Jitter std-dev on class template coefficients, relative to amplitude.
inline constexpr double kClassJitter = 0.1;
/// Per-sample colour-shift intensity is uniform on [kIntensityLow, kIntensityHigh].
inline constexpr double kIntensityLow = 0.5;
inline constexpr double kIntensityHigh = 1.5;
/// Per-pixel texture std-dev, before corruption_strength.
inline constexpr double kTextureSigma = 0.5;

/// P x followed by the trainable affine map and L2 normalisation.
class FrozenEncoder {
 public:
  FrozenEncoder() = default;
  FrozenEncoder(std::size_t dim, std::size_t input_size, std::vector<double> projection);

  std::size_t dim() const { return dim_; }
  std::size_t input_size() const { return input_size_; }
  std::span<const double> row(std::size_t k) const {
    return std::span(projection_).subspan(k * input_size_, input_size_);
  }
  const std::vector<double>& projection() const { return projection_; }

  /// Initial affine parameters: gamma = 1, delta = 0.
  const Vector& gamma() const { return gamma_; }
  const Vector& delta() const { return delta_; }

  /// P * flatten(image), before the affine map.
  Vector Project(const ImageTensor& image) const;

  /// normalize(gamma * Project(image) + delta). Throws ZeroVector.
  Vector Encode(const ImageTensor& image, std::span<const double> gamma,
                std::span<const double> delta) const;
  Vector Encode(const ImageTensor& image) const { return Encode(image, gamma_, delta_); }

 private:
  std::size_t dim_ = 0;
  std::size_t input_size_ = 0;
  std::vector<double> projection_;
  Vector gamma_;
  Vector delta_;
};

struct World {
  WorldSpec spec;
  FrozenEncoder encoder;
  TextBank bank;
  /// Amplitude-1 cosine layouts, one per class.
  std::vector<ImageTensor> class_templates;
  /// Colour shift per domain; domain 0 is clean (all zeros).
  std::vector<Vector> domain_colors;

  /// Feature index aligned with the domain-1 corruption pattern.
  std::size_t spurious_axis() const { return spec.num_classes; }
};

struct LabeledImage {
  ImageTensor image;
  std::size_t label = 0;
  std::size_t domain = 0;
};

/// Deterministic in spec (including spec.seed). Projection and text bank
/// values are rounded to f32 so a saved world reloads bit-identically.
World MakeWorld(const WorldSpec& spec);

/// n images with uniform labels. domain 0 is clean, 1..num_domains corrupted.
/// Throws UnknownDomain.
std::vector<LabeledImage> SampleStream(const World& world, std::size_t n, std::size_t domain,
                                       std::uint64_t seed);

std::string SpecToJson(const WorldSpec& spec);
WorldSpec SpecFromJson(const std::string& text);

/// Writes spec.json, projection.tns and textbank.tns.
void SaveWorld(const World& world, const std::filesystem::path& dir);
World LoadWorld(const std::filesystem::path& dir);

}  // namespace panda::world
