// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sublora/layout.hpp"
#include "sublora/projection.hpp"

namespace sublora {

enum class FactorInit {
  kaiming_uniform,  // U(-1/sqrt(fan_in), 1/sqrt(fan_in))
  orthonormal,      // Kaiming draw, then QR so P_B has orthonormal columns
};

/// VeRA-style reconstruction: one frozen pair (P_B, P_A) shared by every
/// module, and per-module trainable diagonals,
///   B_l = diag(b_l) P_B,  A_l = diag(s_l) P_A,
///   theta_d = concat(b_1, s_1, ..., b_L, s_L),  d = sum (m_l + r_l).
/// With heterogeneous shapes each module uses the top-left m x r / r x n
/// corner of the shared factors. Linear in theta_d.
class VeraReconstruction final : public SubspaceMap {
 public:
  VeraReconstruction(ParameterSpaceLayout layout, std::uint64_t seed,
                     FactorInit init = FactorInit::kaiming_uniform);
  /// Explicit shared factors; must cover the largest module.
  VeraReconstruction(ParameterSpaceLayout layout, Eigen::MatrixXd shared_b,
                     Eigen::MatrixXd shared_a);

  ProjectionKind kind() const noexcept override { return ProjectionKind::vera; }
  std::uint64_t seed() const noexcept override { return seed_; }
  std::size_t full_dim() const noexcept override { return layout_.total_dim(); }
  std::size_t subspace_dim() const noexcept override { return d_; }

  const Eigen::MatrixXd& shared_b() const noexcept { return shared_b_; }
  const Eigen::MatrixXd& shared_a() const noexcept { return shared_a_; }
  /// Start of module l's (b, s) segment in theta_d.
  std::size_t subspace_offset(std::size_t module) const { return offsets_.at(module); }

  void apply(std::span<const float> theta_d, std::span<float> theta_D) const override;
  void apply(std::span<const double> theta_d, std::span<double> theta_D) const override;
  void apply_transpose(std::span<const float> g_D, std::span<float> g_d) const override;
  void apply_transpose(std::span<const double> g_D, std::span<double> g_d) const override;

  /// The block-diagonal D x d matrix: the column for b_l[i] holds row i of
  /// P_B at B_l's row-i coordinates, the column for s_l[k] holds row k of P_A.
  Eigen::MatrixXd materialize_dense(std::size_t max_entries = 100'000'000) const;

 private:
  void init_offsets();
  template <typename S>
  void apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const;
  template <typename S>
  void transpose_impl(std::span<const S> g_D, std::span<S> g_d) const;

  ParameterSpaceLayout layout_;
  std::uint64_t seed_ = 0;
  Eigen::MatrixXd shared_b_;
  Eigen::MatrixXd shared_a_;
  std::vector<std::size_t> offsets_;
  std::size_t d_ = 0;
};

/// LoRA-XS-style reconstruction: per-module frozen P_B (m x r), P_A (r x n)
/// and a trainable r x r core R,
///   B_l = P_B,l R_l,  A_l = P_A,l (constant),
///   theta_d = concat(vec_col(R_1), ..., vec_col(R_L)),  d = sum r_l^2.
/// Affine: apply() writes P theta_d into the B blocks and the frozen P_A into
/// the A blocks; apply_transpose() only reads the B blocks.
class LoraXsReconstruction final : public SubspaceMap {
 public:
  LoraXsReconstruction(ParameterSpaceLayout layout, std::uint64_t seed,
                       FactorInit init = FactorInit::kaiming_uniform);
  LoraXsReconstruction(ParameterSpaceLayout layout, std::vector<Eigen::MatrixXd> factors_b,
                       std::vector<Eigen::MatrixXd> factors_a);

  ProjectionKind kind() const noexcept override { return ProjectionKind::lora_xs; }
  std::uint64_t seed() const noexcept override { return seed_; }
  std::size_t full_dim() const noexcept override { return layout_.total_dim(); }
  std::size_t subspace_dim() const noexcept override { return d_; }

  const Eigen::MatrixXd& factor_b(std::size_t module) const { return factors_b_.at(module); }
  const Eigen::MatrixXd& factor_a(std::size_t module) const { return factors_a_.at(module); }

  void apply(std::span<const float> theta_d, std::span<float> theta_D) const override;
  void apply(std::span<const double> theta_d, std::span<double> theta_D) const override;
  void apply_transpose(std::span<const float> g_D, std::span<float> g_d) const override;
  void apply_transpose(std::span<const double> g_D, std::span<double> g_d) const override;

  /// Linear part (stripe pattern): the column for R_l[k][c] holds column k
  /// of P_B,l at the coordinates of column c of B_l. A rows are zero.
  Eigen::MatrixXd materialize_dense(std::size_t max_entries = 100'000'000) const;
  /// Constant part: P_A,l in every A block, zero elsewhere.
  Eigen::VectorXd offset() const;

 private:
  void init_offsets();
  template <typename S>
  void apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const;
  template <typename S>
  void transpose_impl(std::span<const S> g_D, std::span<S> g_d) const;

  ParameterSpaceLayout layout_;
  std::uint64_t seed_ = 0;
  std::vector<Eigen::MatrixXd> factors_b_;
  std::vector<Eigen::MatrixXd> factors_a_;
  std::vector<std::size_t> offsets_;
  std::size_t d_ = 0;
};

}  // namespace sublora
