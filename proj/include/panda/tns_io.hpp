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

#include "panda/tensor.hpp"

namespace panda::io {

// TNS1: "TNS1", u32 H, u32 W, u32 C (little-endian), then H*W*C f32 values.
std::vector<std::uint8_t> EncodeTns(const ImageTensor& tensor);
ImageTensor DecodeTns(std::span<const std::uint8_t> bytes);

void WriteTns(const std::filesystem::path& path, const ImageTensor& tensor);
ImageTensor ReadTns(const std::filesystem::path& path);

/// Binary PPM (P6, maxval <= 255), scaled to [0, 1].
ImageTensor DecodePpm(std::span<const std::uint8_t> bytes);

/// Sniffs the magic bytes and dispatches to TNS1 or P6.
ImageTensor ReadImage(const std::filesystem::path& path);

/// Row-major matrix stored as TNS1 with H=rows, W=cols, C=1.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

void WriteMatrix(const std::filesystem::path& path, const Matrix& m);
Matrix ReadMatrix(const std::filesystem::path& path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace panda::io
