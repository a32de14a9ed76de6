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

#include "panda/error.hpp"

namespace panda {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kHeterogeneousBatch: return "HeterogeneousBatch";
    case ErrorCode::kPoolExhausted: return "PoolExhausted";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptyNegatives: return "EmptyNegatives";
    case ErrorCode::kNonPositiveSeverity: return "NonPositiveSeverity";
    case ErrorCode::kCorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorCode::kNotUnitVector: return "NotUnitVector";
    case ErrorCode::kAsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kUnknownDomain: return "UnknownDomain";
    case ErrorCode::kNonFiniteLogits: return "NonFiniteLogits";
    case ErrorCode::kEmptyStream: return "EmptyStream";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace panda
