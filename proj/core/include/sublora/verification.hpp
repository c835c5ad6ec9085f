// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "sublora/projection.hpp"

namespace sublora {

enum class Precision { f32, f64 };

struct IsometryReport {
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
  bool pass = false;
};

/// | ||P(x - y)|| - ||x - y|| | / ||x - y|| for one pair, computed as
/// ||apply(x) - apply(y)|| so affine offsets cancel. Norms are accumulated in
/// double even when `precision` is f32. Returns nullopt when x == y.
std::optional<double> isometry_error(const SubspaceMap& p, std::span<const double> x,
                                     std::span<const double> y,
                                     Precision precision = Precision::f64);

/// Draws `samples` Gaussian pairs in R^d and reports the largest and mean
/// relative distance distortion; pass iff max_rel_err <= tol.
IsometryReport verify_isometry(const SubspaceMap& p, std::size_t samples, double tol,
                               std::uint64_t seed, Precision precision = Precision::f64);

/// max |(P^T P - I)_{jk}| over the first `max_columns` columns of P^T P,
/// each column formed as P^T (P e_j). Linear part only.
double orthonormality_error(const SubspaceMap& p, std::size_t max_columns);

/// |<Px, g> - <x, P^T g>| / (||Px|| ||g||) on `samples` random (x, g).
double adjoint_error(const SubspaceMap& p, std::size_t samples, std::uint64_t seed);

/// max ||P^T P x - x|| / ||x|| on `samples` random x. Linear part only.
double left_inverse_error(const SubspaceMap& p, std::size_t samples, std::uint64_t seed);

}  // namespace sublora
