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
#include "panda/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "panda/error.hpp"
#include "panda/parallel.hpp"
#include "panda/rng.hpp"

namespace panda::theory {
namespace {

constexpr std::uint64_t kShardSize = 1 << 16;

void CheckSeverity(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::kNonPositiveSeverity, "s must be > 0, got " + std::to_string(s));
  }
}

void CheckCorrelation(double r) {
  if (!(r >= 0.0 && r < 1.0)) {
    throw Error(ErrorCode::kCorrelationOutOfRange,
                "r must lie in [0, 1), got " + std::to_string(r));
  }
}

inline int Sign(double x) { return x >= 0.0 ? 1 : -1; }

// Per-sample projections onto t: a = v_cls^T t, b = v_corr^T t, c = n^T t.
class ProjectionSampler {
 public:
  explicit ProjectionSampler(const GaussianWorld& w) : world_(w) {
    if (w.dim > 1) {
      const auto d = static_cast<Eigen::Index>(w.dim);
      R_ = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.R.data(), d, d);
      t_ = Eigen::Map<const Eigen::VectorXd>(w.t.data(), d);
      const Eigen::MatrixXd residual = Eigen::MatrixXd::Identity(d, d) - R_ * R_.transpose();
      Eigen::LLT<Eigen::MatrixXd> llt(residual);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::kCorrelationOutOfRange,
                    "I - R R^T is not positive definite; R is not a valid correlation");
      }
      L_ = llt.matrixL();
      z1_.resize(d);
      z2_.resize(d);
      z3_.resize(d);
    } else {
      scale_r_ = w.s * w.r;
      scale_q_ = w.s * std::sqrt(1.0 - w.r * w.r);
    }
  }

  template <typename Fn>
  void Draw(Rng& rng, std::normal_distribution<double>& normal, Fn&& fn) {
    if (world_.dim <= 1) {
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      const double z3 = normal(rng);
      fn(z1, world_.s * z2, scale_r_ * z2 + scale_q_ * z3);
      return;
    }
    for (Eigen::Index k = 0; k < z1_.size(); ++k) z1_[k] = normal(rng);
    for (Eigen::Index k = 0; k < z2_.size(); ++k) z2_[k] = normal(rng);
    for (Eigen::Index k = 0; k < z3_.size(); ++k) z3_[k] = normal(rng);
    const double a = t_.dot(z1_);
    const double b = world_.s * t_.dot(z2_);
    const double c = world_.s * t_.dot(R_ * z2_ + L_ * z3_);
    fn(a, b, c);
  }

 private:
  const GaussianWorld& world_;
  double scale_r_ = 0.0;
  double scale_q_ = 0.0;
  Eigen::MatrixXd R_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd t_;
  Eigen::VectorXd z1_, z2_, z3_;
};

McEstimate Finish(std::uint64_t correct, std::uint64_t n) {
  const double p = static_cast<double>(correct) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), correct, n};
}

}  // namespace

GaussianWorld GaussianWorld::Scalar(double s, double r, double beta) {
  GaussianWorld w;
  w.s = s;
  w.r = r;
  w.beta = beta;
  w.dim = 1;
  return w;
}

GaussianWorld GaussianWorld::HighDim(double s, double beta, Vector t, std::vector<double> R) {
  GaussianWorld w;
  w.s = s;
  w.beta = beta;
  w.dim = t.size();
  w.r = ReduceHighD(t, R);
  w.t = std::move(t);
  w.R = std::move(R);
  return w;
}

GaussianWorld GaussianWorld::Isotropic(double s, double r, double beta, Vector t) {
  const std::size_t d = t.size();
  std::vector<double> R(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) R[k * d + k] = r;
  return HighDim(s, beta, std::move(t), std::move(R));
}

void GaussianWorld::Validate() const {
  CheckSeverity(s);
  CheckCorrelation(r);
  if (!std::isfinite(beta)) throw Error(ErrorCode::kInvalidArgument, "beta must be finite");
  if (dim > 1) {
    if (t.size() != dim || R.size() != dim * dim) {
      throw Error(ErrorCode::kDimensionMismatch, "t/R do not match dim");
    }
    const double r_check = ReduceHighD(t, R);
    if (std::abs(r_check - r) > 1e-12) {
      throw Error(ErrorCode::kInvalidSpec, "r must equal t^T R t");
    }
  }
}

double AccNoOffset(double s) {
  CheckSeverity(s);
  return 0.5 + std::atan(1.0 / s) / std::numbers::pi;
}

double AccWithOffset(double s, double r, double beta) {
  CheckSeverity(s);
  CheckCorrelation(r);
  if (!std::isfinite(beta)) throw Error(ErrorCode::kInvalidArgument, "beta must be finite");
  const double spread = std::sqrt(1.0 - r * r + (beta - r) * (beta - r));
  return 0.5 + std::atan(1.0 / (s * spread)) / std::numbers::pi;
}

double OptimalBeta(const GaussianWorld& world) {
  world.Validate();
  const double best = AccWithOffset(world.s, world.r, world.r);
  for (int i = 0; i <= 100; ++i) {
    const double beta = i / 100.0;
    if (AccWithOffset(world.s, world.r, beta) > best) {
      throw std::logic_error("grid point beats beta = r");
    }
  }
  return world.r;
}

double ReduceHighD(std::span<const double> t, std::span<const double> R) {
  const std::size_t d = t.size();
  if (R.size() != d * d) throw Error(ErrorCode::kDimensionMismatch, "R must be dim x dim");
  if (std::abs(Norm(t) - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kNotUnitVector, "classifier direction must be unit norm");
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double x = R[i * d + j];
      if (x != R[j * d + i]) throw Error(ErrorCode::kAsymmetricMatrix, "R is not symmetric");
      if (!(x >= -1.0 && x <= 1.0)) {
        throw Error(ErrorCode::kCorrelationOutOfRange, "R entries must lie in [-1, 1]");
      }
    }
  }
  const auto d_idx = static_cast<Eigen::Index>(d);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      R.data(), d_idx, d_idx);
  const Eigen::Map<const Eigen::VectorXd> v(t.data(), d_idx);
  return v.dot(m * v);
}

McEstimate McAccuracy(const GaussianWorld& world, std::uint64_t n_samples, std::uint64_t seed) {
  const double beta = world.beta;
  return McAccuracySweep(world, std::span(&beta, 1), n_samples, seed).front();
}

std::vector<McEstimate> McAccuracySweep(const GaussianWorld& world, std::span<const double> betas,
                                        std::uint64_t n_samples, std::uint64_t seed) {
  world.Validate();
  if (n_samples < kMinMcSamples) {
    throw Error(ErrorCode::kTooFewSamples, "need at least " + std::to_string(kMinMcSamples) +
                                               " samples, got " + std::to_string(n_samples));
  }
  const std::uint64_t shards = (n_samples + kShardSize - 1) / kShardSize;
  std::vector<std::vector<std::uint64_t>> counts(shards, std::vector<std::uint64_t>(betas.size()));
  ParallelFor(shards, [&](std::size_t k) {
    ProjectionSampler sampler(world);
    Rng rng = MakeRng(seed, "mc", {k});
    std::normal_distribution<double> normal;
    const std::uint64_t begin = k * kShardSize;
    const std::uint64_t end = std::min(n_samples, begin + kShardSize);
    auto& local = counts[k];
    for (std::uint64_t i = begin; i < end; ++i) {
      sampler.Draw(rng, normal, [&](double a, double b, double c) {
        const int truth = Sign(a);
        for (std::size_t j = 0; j < betas.size(); ++j) {
          local[j] += Sign(a + b - betas[j] * c) == truth;
        }
      });
    }
  });
  std::vector<McEstimate> out;
  out.reserve(betas.size());
  for (std::size_t j = 0; j < betas.size(); ++j) {
    std::uint64_t correct = 0;
    for (const auto& c : counts) correct += c[j];
    out.push_back(Finish(correct, n_samples));
  }
  return out;
}

std::size_t NearestIndex(std::span<const double> grid, double value) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - value) < std::abs(grid[best] - value)) best = i;
  }
  return best;
}

}  // namespace panda::theory
