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
#include "panda/tns_io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include "panda/error.hpp"

namespace panda::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "TNS1 codec assumes a little-endian host");

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};
constexpr std::size_t kHeaderBytes = 16;

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[offset + i]} << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> EncodeTns(const ImageTensor& tensor) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * tensor.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU32(out, static_cast<std::uint32_t>(tensor.height()));
  PutU32(out, static_cast<std::uint32_t>(tensor.width()));
  PutU32(out, static_cast<std::uint32_t>(tensor.channels()));
  for (float f : tensor.data()) PutU32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

ImageTensor DecodeTns(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kParseError, "missing TNS1 header");
  }
  const std::size_t h = GetU32(bytes, 4);
  const std::size_t w = GetU32(bytes, 8);
  const std::size_t c = GetU32(bytes, 12);
  const std::size_t n = h * w * c;
  if (bytes.size() != kHeaderBytes + 4 * n) {
    throw Error(ErrorCode::kParseError,
                "TNS1 payload is " + std::to_string(bytes.size() - kHeaderBytes) +
                    " bytes, expected " + std::to_string(4 * n));
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = std::bit_cast<float>(GetU32(bytes, kHeaderBytes + 4 * i));
  }
  return ImageTensor(h, w, c, std::move(data));
}

ImageTensor DecodePpm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space_and_comments();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      ++digits;
    }
    if (digits == 0) throw Error(ErrorCode::kParseError, "malformed PPM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw Error(ErrorCode::kParseError, "not a binary PPM (P6)");
  }
  pos = 2;
  const std::size_t w = read_int();
  const std::size_t h = read_int();
  const std::size_t maxval = read_int();
  if (maxval == 0 || maxval > 255) {
    throw Error(ErrorCode::kParseError, "only 8-bit PPM is supported");
  }
  ++pos;  // single whitespace before the raster
  const std::size_t n = w * h * 3;
  if (bytes.size() < pos + n) throw Error(ErrorCode::kParseError, "truncated PPM raster");
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = static_cast<float>(bytes[pos + i]) / static_cast<float>(maxval);
  }
  return ImageTensor(h, w, 3, std::move(data));
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                 text.size()));
}

void WriteTns(const std::filesystem::path& path, const ImageTensor& tensor) {
  WriteFileBytes(path, EncodeTns(tensor));
}

ImageTensor ReadTns(const std::filesystem::path& path) {
  try {
    return DecodeTns(ReadFileBytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

ImageTensor ReadImage(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return DecodePpm(bytes);
    return DecodeTns(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void WriteMatrix(const std::filesystem::path& path, const Matrix& m) {
  std::vector<float> data(m.values.begin(), m.values.end());
  WriteTns(path, ImageTensor(m.rows, m.cols, 1, std::move(data)));
}

Matrix ReadMatrix(const std::filesystem::path& path) {
  const ImageTensor t = ReadTns(path);
  if (t.channels() != 1) {
    throw Error(ErrorCode::kParseError, path.string() + ": matrix must have C=1");
  }
  Matrix m{t.height(), t.width(), {}};
  m.values.assign(t.data().begin(), t.data().end());
  return m;
}

}  // namespace panda::io
