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
#include "panda/experiment.hpp"

#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "panda/error.hpp"
#include "panda/metrics.hpp"
#include "panda/nda.hpp"

namespace panda::experiment {

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kZeroShot: return "zero_shot";
    case Method::kPandaOnly: return "panda_only";
    case Method::kTent: return "tent";
    case Method::kTentPanda: return "tent_panda";
  }
  return "tent_panda";
}

Method ParseMethod(std::string_view name) {
  for (Method m : {Method::kZeroShot, Method::kPandaOnly, Method::kTent, Method::kTentPanda}) {
    if (MethodName(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

adapt::AdaptState InitialState(const world::World& world, const SimulateConfig& config) {
  adapt::AdaptState s = adapt::AdaptState::Initial(world.encoder);
  const bool adapts = config.method == Method::kTent || config.method == Method::kTentPanda;
  const bool panda = config.method == Method::kPandaOnly || config.method == Method::kTentPanda;
  s.learning_rate = adapts ? config.learning_rate : 0.0;
  s.beta = panda ? config.beta : 0.0;
  s.ablation = panda ? config.ablation : adapt::Ablation::kNoPanda;
  if (panda && s.ablation == adapt::Ablation::kNoPanda) s.beta = 0.0;
  s.m = panda && s.ablation != adapt::Ablation::kNoPanda
            ? config.m.value_or(nda::DefaultM(config.batch_size))
            : 0;
  s.patch_size = world.spec.patch_size;
  s.stop_prototype_grad = config.stop_prototype_grad;
  s.renormalize = config.renormalize;
  s.logit_scale = config.logit_scale;
  s.Validate();
  return s;
}

adapt::StreamResult Simulate(const world::World& world, const SimulateConfig& config) {
  if (config.stream_len == 0) throw Error(ErrorCode::kEmptyStream, "stream length is 0");
  const adapt::AdaptState state = InitialState(world, config);
  const auto stream = world::SampleStream(world, config.stream_len, config.domain, config.seed);
  return adapt::RunStream(state, stream, world.encoder, world.bank, config.batch_size,
                          config.chunk_size, config.seed);
}

std::string FormatNumber(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

nlohmann::ordered_json ChunkJson(const adapt::ChunkReport& c) {
  nlohmann::ordered_json j;
  j["chunk_index"] = c.chunk_index;
  j["n"] = c.n;
  j["accuracy"] = c.accuracy;
  j["l1_bias"] = c.l1_bias;
  j["mean_entropy"] = c.mean_entropy;
  return j;
}

}  // namespace

std::string ReportJson(const world::World& world, const SimulateConfig& config,
                       const adapt::StreamResult& result) {
  const adapt::AdaptState state = InitialState(world, config);
  nlohmann::ordered_json j;
  auto& cfg = j["config"];
  cfg["method"] = MethodName(config.method);
  cfg["stream_len"] = config.stream_len;
  cfg["batch_size"] = config.batch_size;
  cfg["chunk_size"] = config.chunk_size;
  cfg["beta"] = state.beta;
  cfg["m"] = state.m;
  cfg["learning_rate"] = state.learning_rate;
  cfg["ablation"] = adapt::AblationName(state.ablation);
  cfg["seed"] = config.seed;
  cfg["domain"] = config.domain;
  cfg["world"] = nlohmann::ordered_json::parse(world::SpecToJson(world.spec));
  j["per_chunk"] = nlohmann::ordered_json::array();
  for (const auto& c : result.chunks) j["per_chunk"].push_back(ChunkJson(c));
  auto& fin = j["final"];
  fin = ChunkJson(result.overall);
  fin.erase("chunk_index");
  fin["final_chunk_accuracy"] = result.chunks.back().accuracy;
  fin["final_chunk_l1_bias"] = result.chunks.back().l1_bias;
  fin["batches"] = result.batches;
  fin["encoder_forwards"] = result.encoder_forwards;
  fin["forwards_per_sample"] =
      static_cast<double>(result.encoder_forwards) / static_cast<double>(result.overall.n);
  j["histogram"] = metrics::PredictionHistogram(result.predictions, world.spec.num_classes);
  return j.dump(2) + "\n";
}

std::string ReportCsv(const adapt::StreamResult& result) {
  std::ostringstream out;
  out << "chunk_index,n,accuracy,l1_bias,mean_entropy\n";
  for (const auto& c : result.chunks) {
    out << c.chunk_index << ',' << c.n << ',' << FormatNumber(c.accuracy) << ','
        << FormatNumber(c.l1_bias) << ',' << FormatNumber(c.mean_entropy) << '\n';
  }
  return out.str();
}

std::string HistogramCsv(const adapt::StreamResult& result, std::size_t num_classes) {
  std::ostringstream out;
  out << "class_index,count\n";
  const auto counts = metrics::PredictionHistogram(result.predictions, num_classes);
  for (std::size_t c = 0; c < counts.size(); ++c) out << c << ',' << counts[c] << '\n';
  return out.str();
}

std::vector<SweepRow> Sweep(const world::World& world, const SweepConfig& config) {
  if (config.betas.empty() || config.m_ratios.empty() || config.batch_sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep grids must be non-empty");
  }
  std::vector<SweepRow> rows;
  for (std::size_t batch : config.batch_sizes) {
    for (double beta : config.betas) {
      for (double ratio : config.m_ratios) {
        if (!(ratio >= 0.0 && ratio <= 1.0)) {
          throw Error(ErrorCode::kInvalidArgument, "m ratio must lie in [0, 1]");
        }
        SimulateConfig c = config.base;
        c.batch_size = batch;
        c.beta = beta;
        c.m = static_cast<std::size_t>(std::ceil(static_cast<double>(batch) * ratio - 1e-9));
        const adapt::StreamResult r = Simulate(world, c);
        rows.push_back({batch, beta, ratio, *c.m, r.overall, r.chunks.back().accuracy,
                        r.encoder_forwards});
      }
    }
  }
  return rows;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "batch_size,beta,m_ratio,m,accuracy,l1_bias,mean_entropy,final_chunk_accuracy,"
         "encoder_forwards\n";
  for (const auto& r : rows) {
    out << r.batch_size << ',' << FormatNumber(r.beta) << ',' << FormatNumber(r.m_ratio) << ','
        << r.m << ',' << FormatNumber(r.overall.accuracy) << ','
        << FormatNumber(r.overall.l1_bias) << ',' << FormatNumber(r.overall.mean_entropy) << ','
        << FormatNumber(r.final_chunk_accuracy) << ',' << r.encoder_forwards << '\n';
  }
  return out.str();
}

}  // namespace panda::experiment
