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
#include <initializer_list>
#include <random>
#include <string_view>

namespace panda {

using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms, used to name substreams.
inline std::uint64_t HashName(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent seed for the substream (seed, name, indices...).
inline std::uint64_t SubstreamSeed(std::uint64_t seed, std::string_view name,
                                   std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t s = SplitMix64(seed ^ SplitMix64(HashName(name)));
  for (std::uint64_t i : indices) s = SplitMix64(s ^ SplitMix64(i + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng MakeRng(std::uint64_t seed, std::string_view name,
                   std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(SubstreamSeed(seed, name, indices));
}

}  // namespace panda
