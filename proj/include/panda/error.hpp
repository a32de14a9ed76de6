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

#include <stdexcept>
#include <string>
#include <string_view>

namespace panda {

enum class ErrorCode {
  kDimensionMismatch,
  kEmptyBatch,
  kHeterogeneousBatch,
  kPoolExhausted,
  kZeroVector,
  kEmptyNegatives,
  kNonPositiveSeverity,
  kCorrelationOutOfRange,
  kNotUnitVector,
  kAsymmetricMatrix,
  kTooFewSamples,
  kInvalidSpec,
  kUnknownDomain,
  kNonFiniteLogits,
  kEmptyStream,
  kEmptyInput,
  kLabelOutOfRange,
  kParseError,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every precondition violation in the library surfaces as this exception.
/// The CLI maps it to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace panda
