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
#include "panda/nda.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "panda/error.hpp"
#include "panda/rng.hpp"

namespace panda::nda {
namespace {

// Unbiased draw from [0, bound) by rejection.
std::uint64_t UniformBelow(Rng& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  std::uint64_t x = rng();
  while (x < threshold) x = rng();
  return x % bound;
}

void CheckGrid(const ImageTensor& image, const PatchGrid& grid) {
  if (image.height() != grid.height() || image.width() != grid.width()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "image " + std::to_string(image.height()) + "x" +
                    std::to_string(image.width()) + " does not match grid " +
                    std::to_string(grid.height()) + "x" + std::to_string(grid.width()));
  }
}

}  // namespace

PatchGrid PatchGrid::Make(std::size_t height, std::size_t width, std::size_t patch_height,
                          std::size_t patch_width) {
  if (patch_height == 0 || patch_width == 0 || height == 0 || width == 0 ||
      height % patch_height != 0 || width % patch_width != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "patch " + std::to_string(patch_height) + "x" + std::to_string(patch_width) +
                    " does not tile " + std::to_string(height) + "x" + std::to_string(width));
  }
  return {patch_height, patch_width, height / patch_height, width / patch_width};
}

std::vector<ImageTensor> Patchify(const ImageTensor& image, const PatchGrid& grid) {
  CheckGrid(image, grid);
  const std::size_t channels = image.channels();
  const std::size_t row_len = grid.patch_width * channels;
  std::vector<ImageTensor> patches;
  patches.reserve(grid.count());
  for (std::size_t gr = 0; gr < grid.rows; ++gr) {
    for (std::size_t gc = 0; gc < grid.cols; ++gc) {
      ImageTensor patch(grid.patch_height, grid.patch_width, channels);
      for (std::size_t y = 0; y < grid.patch_height; ++y) {
        const float* src = image.pixel(gr * grid.patch_height + y, gc * grid.patch_width);
        std::copy(src, src + row_len, patch.pixel(y, 0));
      }
      patches.push_back(std::move(patch));
    }
  }
  return patches;
}

ImageTensor Depatchify(std::span<const ImageTensor> patches, const PatchGrid& grid) {
  if (patches.size() != grid.count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(patches.size()) + " patches for a grid of " +
                    std::to_string(grid.count()));
  }
  const std::size_t channels = patches.front().channels();
  ImageTensor image(grid.height(), grid.width(), channels);
  const std::size_t row_len = grid.patch_width * channels;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const ImageTensor& patch = patches[k];
    if (patch.height() != grid.patch_height || patch.width() != grid.patch_width ||
        patch.channels() != channels) {
      throw Error(ErrorCode::kDimensionMismatch, "patch shape does not match grid");
    }
    const std::size_t gr = k / grid.cols;
    const std::size_t gc = k % grid.cols;
    for (std::size_t y = 0; y < grid.patch_height; ++y) {
      const float* src = patch.pixel(y, 0);
      std::copy(src, src + row_len,
                image.pixel(gr * grid.patch_height + y, gc * grid.patch_width));
    }
  }
  return image;
}

PatchPool BuildPool(std::span<const ImageTensor> batch, const PatchGrid& grid,
                    std::uint64_t seed) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "cannot pool an empty batch");
  for (const ImageTensor& image : batch) {
    if (!image.SameShape(batch.front())) {
      throw Error(ErrorCode::kHeterogeneousBatch, "batch images differ in shape");
    }
  }
  PatchPool pool;
  pool.source_batch_size = batch.size();
  pool.permutation_seed = seed;
  pool.patches.reserve(batch.size() * grid.count());
  pool.origins.reserve(batch.size() * grid.count());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto patches = Patchify(batch[i], grid);
    for (std::size_t k = 0; k < patches.size(); ++k) {
      pool.patches.push_back(std::move(patches[k]));
      pool.origins.push_back({i, k});
    }
  }
  Rng rng = MakeRng(seed, "patch_pool");
  for (std::size_t i = pool.size(); i > 1; --i) {
    const std::size_t j = UniformBelow(rng, i);
    std::swap(pool.patches[i - 1], pool.patches[j]);
    std::swap(pool.origins[i - 1], pool.origins[j]);
  }
  return pool;
}

std::vector<ImageTensor> Recompose(const PatchPool& pool, const PatchGrid& grid,
                                   std::size_t m) {
  const std::size_t per_image = grid.count();
  if (m * per_image > pool.size()) {
    throw Error(ErrorCode::kPoolExhausted,
                std::to_string(m) + " images need " + std::to_string(m * per_image) +
                    " patches, pool has " + std::to_string(pool.size()));
  }
  std::vector<ImageTensor> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.push_back(Depatchify(
        std::span(pool.patches).subspan(j * per_image, per_image), grid));
  }
  return out;
}

std::size_t DefaultM(std::size_t batch_size) {
  if (batch_size == 0) throw Error(ErrorCode::kEmptyBatch, "batch size must be >= 1");
  return (batch_size + 9) / 10;
}

std::vector<ImageTensor> NegativeAugment(std::span<const ImageTensor> batch,
                                         const PatchGrid& grid, std::size_t m,
                                         std::uint64_t seed) {
  if (m == 0) return {};
  return Recompose(BuildPool(batch, grid, seed), grid, m);
}

std::vector<ImageTensor> PerImageNegatives(std::span<const ImageTensor> batch,
                                           const PatchGrid& grid, std::size_t m,
                                           std::uint64_t seed) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "cannot pool an empty batch");
  std::vector<ImageTensor> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const PatchPool pool =
        BuildPool(batch.subspan(j % batch.size(), 1), grid, SubstreamSeed(seed, "per_image", {j}));
    out.push_back(Recompose(pool, grid, 1).front());
  }
  return out;
}

}  // namespace panda::nda
