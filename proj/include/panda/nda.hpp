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

#include "panda/tensor.hpp"

namespace panda::nda {

/// Non-overlapping tiling of an H x W image by patch_height x patch_width.
struct PatchGrid {
  std::size_t patch_height = 0;
  std::size_t patch_width = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  /// Throws DimensionMismatch unless the patch size divides the image exactly.
  static PatchGrid Make(std::size_t height, std::size_t width, std::size_t patch_height,
                        std::size_t patch_width);
  static PatchGrid For(const ImageTensor& image, std::size_t patch_height,
                       std::size_t patch_width) {
    return Make(image.height(), image.width(), patch_height, patch_width);
  }

  std::size_t count() const { return rows * cols; }
  std::size_t height() const { return rows * patch_height; }
  std::size_t width() const { return cols * patch_width; }
};

inline constexpr std::size_t kDefaultPatchSize = 32;

/// Where a pool entry came from.
struct PatchOrigin {
  std::size_t image = 0;
  std::size_t cell = 0;  // row-major index in the grid
};

struct PatchPool {
  std::vector<ImageTensor> patches;
  std::vector<PatchOrigin> origins;
  std::size_t source_batch_size = 0;
  std::uint64_t permutation_seed = 0;

  std::size_t size() const { return patches.size(); }
};

/// Cuts the image into grid.count() patches in row-major grid order.
std::vector<ImageTensor> Patchify(const ImageTensor& image, const PatchGrid& grid);

/// Inverse of Patchify: places patches row-major into a grid-sized image.
ImageTensor Depatchify(std::span<const ImageTensor> patches, const PatchGrid& grid);

/// Patches of every image, shuffled by a seeded Fisher-Yates permutation.
PatchPool BuildPool(std::span<const ImageTensor> batch, const PatchGrid& grid,
                    std::uint64_t seed);

/// m images built from the first m * grid.count() pool entries, so no pool
/// entry is used twice. Throws PoolExhausted if the pool is too small.
std::vector<ImageTensor> Recompose(const PatchPool& pool, const PatchGrid& grid,
                                   std::size_t m);

/// ceil(batch_size / 10).
std::size_t DefaultM(std::size_t batch_size);

/// BuildPool followed by Recompose: batch-shared negatives.
std::vector<ImageTensor> NegativeAugment(std::span<const ImageTensor> batch,
                                         const PatchGrid& grid, std::size_t m,
                                         std::uint64_t seed);

/// Ablation: negative j shuffles the patches of image j mod B alone.
std::vector<ImageTensor> PerImageNegatives(std::span<const ImageTensor> batch,
                                           const PatchGrid& grid, std::size_t m,
                                           std::uint64_t seed);

}  // namespace panda::nda
