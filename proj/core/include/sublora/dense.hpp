// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "sublora/projection.hpp"

namespace sublora {

/// D x d matrix with i.i.d. N(0, 1/d) entries whose columns are then
/// orthonormalized by Householder QR (signs fixed so diag(R) > 0).
/// Small-scale oracle only; guarded at `max_entries`.
Eigen::MatrixXd build_dense_gaussian(std::size_t D, std::size_t d, std::uint64_t seed,
                                     std::size_t max_entries = 100'000'000);

/// An explicit D x d matrix behind the SubspaceMap interface. O(D d) apply.
class DenseProjection final : public SubspaceMap {
 public:
  DenseProjection(Eigen::MatrixXd matrix, ProjectionKind kind, std::uint64_t seed);

  static DenseProjection gaussian(std::size_t D, std::size_t d, std::uint64_t seed) {
    return DenseProjection(build_dense_gaussian(D, d, seed), ProjectionKind::dense, seed);
  }

  ProjectionKind kind() const noexcept override { return kind_; }
  std::uint64_t seed() const noexcept override { return seed_; }
  std::size_t full_dim() const noexcept override { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t subspace_dim() const noexcept override { return static_cast<std::size_t>(matrix_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

  void apply(std::span<const float> theta_d, std::span<float> theta_D) const override;
  void apply(std::span<const double> theta_d, std::span<double> theta_D) const override;
  void apply_transpose(std::span<const float> g_D, std::span<float> g_d) const override;
  void apply_transpose(std::span<const double> g_D, std::span<double> g_d) const override;

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXf matrix_f_;
  ProjectionKind kind_;
  std::uint64_t seed_;
};

}  // namespace sublora
