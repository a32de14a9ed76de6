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
#include "panda/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "panda/error.hpp"
#include "panda/metrics.hpp"
#include "panda/nda.hpp"
#include "panda/parallel.hpp"
#include "panda/rng.hpp"

namespace panda::adapt {
namespace {

struct Softmax {
  Vector p;
  Vector log_p;
  double entropy = 0.0;
};

Softmax SoftmaxStats(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::kEmptyInput, "no logits");
  for (double l : logits) {
    if (!std::isfinite(l)) throw Error(ErrorCode::kNonFiniteLogits, "logit is not finite");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  Softmax out;
  out.p.resize(logits.size());
  out.log_p.resize(logits.size());
  double z = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) z += std::exp(logits[c] - top);
  const double log_z = std::log(z);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    out.log_p[c] = logits[c] - top - log_z;
    out.p[c] = std::exp(out.log_p[c]);
  }
  for (std::size_t c = 0; c < logits.size(); ++c) out.entropy -= out.p[c] * out.log_p[c];
  return out;
}

// One encoder forward with the affine map, kept for the backward pass.
struct Encoded {
  Vector h;
  double norm = 0.0;
  Vector v;
};

Encoded EncodeProjected(Vector h, const AdaptState& state) {
  Encoded e;
  Vector z(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) z[k] = state.gamma[k] * h[k] + state.delta[k];
  e.norm = Norm(z);
  e.v = Normalize(z);
  e.h = std::move(h);
  return e;
}

std::vector<Vector> ProjectAll(std::span<const ImageTensor> images,
                               const world::FrozenEncoder& encoder) {
  std::vector<Vector> out(images.size());
  ParallelFor(images.size(), [&](std::size_t i) { out[i] = encoder.Project(images[i]); });
  return out;
}

struct Forward {
  std::vector<Encoded> originals;
  std::vector<Encoded> negatives;
  bool offset = false;
  Vector prototype;
  std::vector<Vector> offset_vectors;  // v_i - beta * n_bar
  std::vector<double> offset_norms;    // only with renormalize
  std::vector<Vector> debiased;        // d_i fed to the logits
  std::vector<Vector> logits;
  std::vector<Softmax> softmax;
  double loss = 0.0;
};

Forward RunForward(const AdaptState& state, std::vector<Vector> h_orig,
                   std::vector<Vector> h_neg, const TextBank& bank) {
  Forward f;
  for (Vector& h : h_orig) f.originals.push_back(EncodeProjected(std::move(h), state));
  for (Vector& h : h_neg) f.negatives.push_back(EncodeProjected(std::move(h), state));
  f.offset = state.ablation != Ablation::kNoPanda && !f.negatives.empty();

  std::vector<Vector> v;
  v.reserve(f.originals.size());
  for (const Encoded& e : f.originals) v.push_back(e.v);
  if (f.offset) {
    std::vector<Vector> n;
    for (const Encoded& e : f.negatives) n.push_back(e.v);
    f.prototype = MeanPrototype(n).mean;
    f.offset_vectors = OffsetVectors(v, {f.prototype, n.size()}, state.beta);
  } else {
    f.offset_vectors = std::move(v);
  }
  if (state.renormalize) {
    for (const Vector& d : f.offset_vectors) {
      f.offset_norms.push_back(Norm(d));
      f.debiased.push_back(Normalize(d));
    }
  } else {
    f.debiased = f.offset_vectors;
  }

  for (const Vector& d : f.debiased) {
    f.logits.push_back(Logits(d, bank, state.logit_scale));
    f.softmax.push_back(SoftmaxStats(f.logits.back()));
  }
  double total = 0.0;
  for (const Softmax& s : f.softmax) total += s.entropy;
  f.loss = total / static_cast<double>(f.softmax.size());
  return f;
}

// dL/dz for z -> z / ||z||, given dL/dv.
Vector NormalizeBackward(const Vector& v, double norm, const Vector& grad_v) {
  const double proj = Dot(v, grad_v);
  Vector g(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) g[k] = (grad_v[k] - v[k] * proj) / norm;
  return g;
}

void Accumulate(const Encoded& e, const Vector& grad_v, LossGrad& out) {
  const Vector grad_z = NormalizeBackward(e.v, e.norm, grad_v);
  for (std::size_t k = 0; k < grad_z.size(); ++k) {
    out.grad_gamma[k] += grad_z[k] * e.h[k];
    out.grad_delta[k] += grad_z[k];
  }
}

LossGrad RunBackward(const AdaptState& state, const Forward& f, const TextBank& bank) {
  const std::size_t dim = state.gamma.size();
  const std::size_t batch = f.originals.size();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  LossGrad out{f.loss, Vector(dim, 0.0), Vector(dim, 0.0)};

  std::vector<Vector> grad_d(batch, Vector(dim, 0.0));
  for (std::size_t i = 0; i < batch; ++i) {
    const Softmax& s = f.softmax[i];
    for (std::size_t c = 0; c < s.p.size(); ++c) {
      const double grad_logit = -s.p[c] * (s.log_p[c] + s.entropy) * inv_batch;
      const double w = state.logit_scale * grad_logit;
      for (std::size_t k = 0; k < dim; ++k) grad_d[i][k] += w * bank[c][k];
    }
    if (state.renormalize) {
      grad_d[i] = NormalizeBackward(f.debiased[i], f.offset_norms[i], grad_d[i]);
    }
  }

  for (std::size_t i = 0; i < batch; ++i) Accumulate(f.originals[i], grad_d[i], out);

  if (f.offset && !state.stop_prototype_grad) {
    Vector grad_proto(dim, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t k = 0; k < dim; ++k) grad_proto[k] -= state.beta * grad_d[i][k];
    }
    const double inv_m = 1.0 / static_cast<double>(f.negatives.size());
    Vector grad_n(dim);
    for (std::size_t k = 0; k < dim; ++k) grad_n[k] = grad_proto[k] * inv_m;
    for (const Encoded& e : f.negatives) Accumulate(e, grad_n, out);
  }
  return out;
}

Forward ForwardImages(const AdaptState& state, std::span<const ImageTensor> batch,
                      std::span<const ImageTensor> negatives,
                      const world::FrozenEncoder& encoder, const TextBank& bank) {
  state.Validate();
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  if (state.gamma.size() != encoder.dim() || bank.dim() != encoder.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "state, encoder and bank dims differ");
  }
  const bool use_negatives = state.ablation != Ablation::kNoPanda;
  return RunForward(state, ProjectAll(batch, encoder),
                    use_negatives ? ProjectAll(negatives, encoder) : std::vector<Vector>{},
                    bank);
}

}  // namespace

std::string_view AblationName(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoPanda: return "no_panda";
    case Ablation::kPerImageShuffle: return "per_image_shuffle";
    case Ablation::kNoAveraging: return "no_averaging";
  }
  return "full";
}

Ablation ParseAblation(std::string_view name) {
  for (Ablation a : {Ablation::kFull, Ablation::kNoPanda, Ablation::kPerImageShuffle,
                     Ablation::kNoAveraging}) {
    if (AblationName(a) == name) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown ablation '" + std::string(name) + "'");
}

AdaptState AdaptState::Initial(const world::FrozenEncoder& encoder) {
  AdaptState s;
  s.gamma = encoder.gamma();
  s.delta = encoder.delta();
  return s;
}

void AdaptState::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be >= 0");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must be >= 0");
  }
  if (gamma.size() != delta.size() || gamma.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "gamma and delta must share a positive dim");
  }
  if (!(logit_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "logit scale must be > 0");
}

double SoftmaxEntropy(std::span<const double> logits) { return SoftmaxStats(logits).entropy; }

LossGrad LossAndGrad(const AdaptState& state, std::span<const ImageTensor> batch,
                     std::span<const ImageTensor> negatives,
                     const world::FrozenEncoder& encoder, const TextBank& bank) {
  const Forward f = ForwardImages(state, batch, negatives, encoder, bank);
  return RunBackward(state, f, bank);
}

double Loss(const AdaptState& state, std::span<const ImageTensor> batch,
            std::span<const ImageTensor> negatives, const world::FrozenEncoder& encoder,
            const TextBank& bank) {
  return ForwardImages(state, batch, negatives, encoder, bank).loss;
}

std::vector<ImageTensor> GenerateNegatives(const AdaptState& state,
                                           std::span<const ImageTensor> batch,
                                           std::uint64_t seed) {
  if (!state.UsesPanda()) return {};
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  const auto grid = nda::PatchGrid::For(batch.front(), state.patch_size, state.patch_size);
  // A short trailing batch cannot supply more than B negatives.
  const std::size_t m = std::min(state.m, batch.size());
  switch (state.ablation) {
    case Ablation::kPerImageShuffle:
      return nda::PerImageNegatives(batch, grid, m, seed);
    case Ablation::kNoAveraging: {
      auto all = nda::NegativeAugment(batch, grid, m, seed);
      Rng rng = MakeRng(seed, "pick_negative");
      const std::size_t j = rng() % all.size();
      return {std::move(all[j])};
    }
    default:
      return nda::NegativeAugment(batch, grid, m, seed);
  }
}

StepResult AdaptStep(const AdaptState& state, std::span<const ImageTensor> batch,
                     std::span<const std::size_t> labels, const world::FrozenEncoder& encoder,
                     const TextBank& bank, std::uint64_t nda_seed) {
  if (!labels.empty() && labels.size() != batch.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "labels do not match batch");
  }
  const auto negatives = GenerateNegatives(state, batch, nda_seed);
  const Forward f = ForwardImages(state, batch, negatives, encoder, bank);

  StepResult result{state, {}};
  if (state.learning_rate > 0.0) {
    const LossGrad g = RunBackward(state, f, bank);
    for (std::size_t k = 0; k < state.gamma.size(); ++k) {
      result.state.gamma[k] -= state.learning_rate * g.grad_gamma[k];
      result.state.delta[k] -= state.learning_rate * g.grad_delta[k];
    }
  }
  ++result.state.step_count;

  BatchReport& report = result.report;
  report.logits = f.logits;
  report.mean_entropy = f.loss;
  report.encoder_forwards = batch.size() + f.negatives.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    report.predictions.push_back(ArgMax(f.logits[i]));
    report.entropies.push_back(f.softmax[i].entropy);
    if (!labels.empty()) correct += report.predictions[i] == labels[i];
  }
  if (!labels.empty()) {
    report.accuracy = static_cast<double>(correct) / static_cast<double>(batch.size());
    report.l1_bias = metrics::L1Distance(metrics::SoftPredDist(report.logits),
                                         metrics::GroundTruthDist(labels, bank.num_classes()));
  }
  return result;
}

StreamResult RunStream(const AdaptState& state, std::span<const world::LabeledImage> stream,
                       const world::FrozenEncoder& encoder, const TextBank& bank,
                       std::size_t batch_size, std::size_t chunk_size, std::uint64_t seed) {
  if (stream.empty()) throw Error(ErrorCode::kEmptyStream, "stream has no samples");
  if (batch_size == 0 || chunk_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch and chunk sizes must be positive");
  }
  StreamResult result;
  result.final_state = state;
  std::vector<Vector> logits;
  std::vector<double> entropies;
  std::vector<std::size_t> labels;
  logits.reserve(stream.size());

  for (std::size_t begin = 0; begin < stream.size(); begin += batch_size) {
    const std::size_t end = std::min(stream.size(), begin + batch_size);
    std::vector<ImageTensor> images;
    std::vector<std::size_t> batch_labels;
    for (std::size_t i = begin; i < end; ++i) {
      images.push_back(stream[i].image);
      batch_labels.push_back(stream[i].label);
    }
    StepResult step = AdaptStep(result.final_state, images, batch_labels, encoder, bank,
                                SubstreamSeed(seed, "nda", {result.batches}));
    result.final_state = std::move(step.state);
    result.encoder_forwards += step.report.encoder_forwards;
    ++result.batches;
    for (std::size_t i = 0; i < images.size(); ++i) {
      logits.push_back(std::move(step.report.logits[i]));
      entropies.push_back(step.report.entropies[i]);
      result.predictions.push_back(step.report.predictions[i]);
    }
    labels.insert(labels.end(), batch_labels.begin(), batch_labels.end());
  }

  auto aggregate = [&](std::size_t index, std::size_t begin, std::size_t end) {
    ChunkReport r{index, end - begin, 0.0, 0.0, 0.0};
    std::size_t correct = 0;
    double entropy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      correct += result.predictions[i] == labels[i];
      entropy += entropies[i];
    }
    const auto n = static_cast<double>(r.n);
    r.accuracy = static_cast<double>(correct) / n;
    r.mean_entropy = entropy / n;
    const auto chunk_logits = std::span(logits).subspan(begin, end - begin);
    const auto chunk_labels = std::span(labels).subspan(begin, end - begin);
    r.l1_bias = metrics::L1Distance(metrics::SoftPredDist(chunk_logits),
                                    metrics::GroundTruthDist(chunk_labels, bank.num_classes()));
    return r;
  };
  for (std::size_t begin = 0, index = 0; begin < stream.size(); begin += chunk_size, ++index) {
    result.chunks.push_back(aggregate(index, begin, std::min(stream.size(), begin + chunk_size)));
  }
  result.overall = aggregate(0, 0, stream.size());
  return result;
}

}  // namespace panda::adapt
