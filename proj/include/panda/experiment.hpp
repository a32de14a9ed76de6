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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panda/adapt.hpp"
#include "panda/world.hpp"

namespace panda::experiment {

enum class Method { kZeroShot, kPandaOnly, kTent, kTentPanda };

std::string_view MethodName(Method m);
Method ParseMethod(std::string_view name);

struct SimulateConfig {
  Method method = Method::kTentPanda;
  std::size_t stream_len = 10'000;
  std::size_t batch_size = 100;
  std::size_t chunk_size = 1'000;
  double beta = adapt::kDefaultBeta;
  /// Negatives per batch; ceil(B / 10) when unset.
  std::optional<std::size_t> m;
  double learning_rate = adapt::kDefaultLearningRate;
  adapt::Ablation ablation = adapt::Ablation::kFull;
  std::uint64_t seed = 0;
  std::size_t domain = 1;
  bool stop_prototype_grad = false;
  bool renormalize = false;
  double logit_scale = kLogitScale;
};

/// Initial adaptation state implied by the method and flags.
adapt::AdaptState InitialState(const world::World& world, const SimulateConfig& config);

/// Samples the stream for config.domain and runs it through RunStream.
adapt::StreamResult Simulate(const world::World& world, const SimulateConfig& config);

/// Shortest round-trip decimal form; the only float formatting used in
/// reports so outputs are byte-stable.
std::string FormatNumber(double x);

/// {config, per_chunk: [...], final: {...}, histogram: [...]}.
std::string ReportJson(const world::World& world, const SimulateConfig& config,
                       const adapt::StreamResult& result);
/// chunk_index,n,accuracy,l1_bias,mean_entropy
std::string ReportCsv(const adapt::StreamResult& result);
/// class_index,count
std::string HistogramCsv(const adapt::StreamResult& result, std::size_t num_classes);

struct SweepConfig {
  SimulateConfig base;
  std::vector<double> betas;
  std::vector<double> m_ratios;
  std::vector<std::size_t> batch_sizes;
};

struct SweepRow {
  std::size_t batch_size = 0;
  double beta = 0.0;
  double m_ratio = 0.0;
  std::size_t m = 0;
  adapt::ChunkReport overall;
  double final_chunk_accuracy = 0.0;
  std::size_t encoder_forwards = 0;
};

/// Row order: batch size, then beta, then m ratio. m = ceil(B * ratio).
std::vector<SweepRow> Sweep(const world::World& world, const SweepConfig& config);
std::string SweepCsv(const std::vector<SweepRow>& rows);

}  // namespace panda::experiment
