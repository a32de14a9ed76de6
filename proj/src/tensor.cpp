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
#include "panda/tensor.hpp"

#include <string>
#include <utility>

#include "panda/error.hpp"

namespace panda {

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels)
    : ImageTensor(height, width, channels,
                  std::vector<float>(height * width * channels, 0.0f)) {}

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height == 0 || width == 0 || channels == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "image dimensions must be positive");
  }
  if (data_.size() != height * width * channels) {
    throw Error(ErrorCode::kDimensionMismatch,
                "data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(height) + "x" + std::to_string(width) + "x" +
                    std::to_string(channels));
  }
}

}  // namespace panda
