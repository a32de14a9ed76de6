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
#include <span>
#include <vector>

#include "panda/debias.hpp"

namespace panda::theory {

/// Gaussian model of a binary classifier whose feature is class signal plus
/// corruption, offset by a correlated negative feature.
///
/// dim == 1: scalar model, t and R unused.
/// dim  > 1: t is the unit classifier direction and R (row-major dim x dim)
///           the cross-correlation between the corruption component and the
///           negative feature; r must equal t^T R t.
struct GaussianWorld {
  double s = 1.0;
  double r = 0.0;
  double beta = 0.0;
  std::size_t dim = 1;
  Vector t;
  std::vector<double> R;

  static GaussianWorld Scalar(double s, double r, double beta);
  /// Fills r with t^T R t.
  static GaussianWorld HighDim(double s, double beta, Vector t, std::vector<double> R);
  /// R = r I with the given unit direction.
  static GaussianWorld Isotropic(double s, double r, double beta, Vector t);

  /// Throws NonPositiveSeverity, CorrelationOutOfRange, NotUnitVector,
  /// AsymmetricMatrix or DimensionMismatch.
  void Validate() const;
};

inline constexpr std::uint64_t kMinMcSamples = 10'000;
inline constexpr std::uint64_t kDefaultMcSamples = 1'000'000;

/// 1/2 + atan(1/s) / pi.
double AccNoOffset(double s);

/// 1/2 + atan(1 / (s sqrt(1 - r^2 + (beta - r)^2))) / pi.
double AccWithOffset(double s, double r, double beta);

/// The maximiser r; cross-checked against a grid over [0, 1].
double OptimalBeta(const GaussianWorld& world);

/// t^T R t for R row-major dim x dim.
double ReduceHighD(std::span<const double> t, std::span<const double> R);

struct McEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t samples = 0;
};

/// Monte Carlo accuracy of sign((v - beta n)^T t) against sign(v_cls^T t),
/// sampling n through the reparametrisation n = s (R z2 + L z3) with
/// L L^T = I - R R^T (for dim 1: n = s r z2 + s sqrt(1 - r^2) z3).
/// Sharded on fixed-size blocks so the result is independent of workers.
McEstimate McAccuracy(const GaussianWorld& world, std::uint64_t n_samples, std::uint64_t seed);

/// One draw set, evaluated at every beta (common random numbers).
std::vector<McEstimate> McAccuracySweep(const GaussianWorld& world, std::span<const double> betas,
                                        std::uint64_t n_samples, std::uint64_t seed);

/// Index of the grid point nearest to value (lowest index on ties).
std::size_t NearestIndex(std::span<const double> grid, double value);

}  // namespace panda::theory
