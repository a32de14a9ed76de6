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

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "panda/debias.hpp"
#include "panda/rng.hpp"
#include "panda/tensor.hpp"
#include "panda/world.hpp"

namespace panda::testing {

inline ImageTensor RandomImage(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  ImageTensor img(h, w, c);
  for (float& x : img.data()) x = u(rng);
  return img;
}

inline Vector RandomVector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> n;
  Vector v(dim);
  for (double& x : v) x = n(rng);
  return v;
}

inline Vector RandomUnit(std::size_t dim, Rng& rng) { return Normalize(RandomVector(dim, rng)); }

// Small world used by the fast unit tests.
inline world::WorldSpec SmallSpec(std::uint64_t seed = 0) {
  world::WorldSpec spec;
  spec.num_classes = 4;
  spec.image_size = 16;
  spec.channels = 2;
  spec.feature_dim = 7;
  spec.patch_size = 4;
  spec.num_domains = 2;
  spec.seed = seed;
  return spec;
}

// Fresh scratch directory under the build tree (or the system temp dir).
inline std::filesystem::path ScratchDir(const std::string& name) {
  const char* root = std::getenv("PANDA_TEST_TMP");
  std::filesystem::path dir =
      root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "panda_tests";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace panda::testing
