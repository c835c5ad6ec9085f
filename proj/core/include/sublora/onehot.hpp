// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sublora/projection.hpp"

namespace sublora {

/// The frozen one-hot projection: row i of P has a single nonzero
/// 1/sqrt(n_j) in column j = index[i], where n_j is the number of rows
/// assigned to j. Every column is nonempty, so P^T P = I_d.
///
/// Only the index map is stored; P is never formed except by
/// materialize_dense() for small oracle checks.
class OneHotProjection final : public SubspaceMap {
 public:
  /// Uniform i.i.d. assignment of the D rows to d columns, drawn from
  /// Philox keyed by `seed`, followed by the deterministic empty-column
  /// repair (see repair_empty_columns). Requires 1 <= d <= D.
  static OneHotProjection build(std::size_t D, std::size_t d, std::uint64_t seed);

  /// P = I_D (plain LoRA).
  static OneHotProjection identity(std::size_t D);

  /// Wraps an existing assignment. Throws if any column in [0, d) is empty
  /// or an index is out of range.
  static OneHotProjection from_assignment(std::vector<std::uint32_t> index, std::size_t d,
                                          ProjectionKind kind = ProjectionKind::custom,
                                          std::uint64_t seed = 0);

  ProjectionKind kind() const noexcept override { return kind_; }
  std::uint64_t seed() const noexcept override { return seed_; }
  std::size_t full_dim() const noexcept override { return index_.size(); }
  std::size_t subspace_dim() const noexcept override { return counts_.size(); }

  std::span<const std::uint32_t> index() const noexcept { return index_; }
  std::span<const std::uint32_t> counts() const noexcept { return counts_; }
  /// Per-row normalization: norms()[i] == column_norm(index()[i]).
  std::span<const double> norms() const noexcept { return norms_; }
  double column_norm(std::size_t j) const { return column_norms_.at(j); }

  /// out[i] = theta_d[index[i]] * norm[i].
  void apply(std::span<const float> theta_d, std::span<float> theta_D) const override;
  void apply(std::span<const double> theta_d, std::span<double> theta_D) const override;

  /// out[j] = sum over {i : index[i] = j} of g_D[i] * norm[i], accumulated
  /// sequentially in ascending i.
  void apply_transpose(std::span<const float> g_D, std::span<float> g_d) const override;
  void apply_transpose(std::span<const double> g_D, std::span<double> g_d) const override;

  /// Dense D x d matrix. Throws std::length_error past max_entries.
  Eigen::MatrixXd materialize_dense(std::size_t max_entries = 100'000'000) const;

 private:
  OneHotProjection(std::vector<std::uint32_t> index, std::size_t d, ProjectionKind kind,
                   std::uint64_t seed);

  template <typename S>
  void apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const;
  template <typename S>
  void transpose_impl(std::span<const S> g_D, std::span<S> g_d) const;

  ProjectionKind kind_;
  std::uint64_t seed_;
  std::vector<std::uint32_t> index_;
  std::vector<std::uint32_t> counts_;
  std::vector<double> column_norms_;
  std::vector<double> norms_;
};

/// Position-keyed uniform draw of `rows` indices in [lo, hi), position
/// i -> Philox(seed, onehot_index stream, i + position_base).
std::vector<std::uint32_t> draw_uniform_indices(std::size_t rows, std::uint32_t lo,
                                                std::uint32_t hi, std::uint64_t seed,
                                                std::uint64_t position_base = 0);

/// Makes every column in [lo, hi) nonempty. For each empty column j in
/// ascending order, the column with the largest current count (lowest column
/// id on ties) gives up its lowest-numbered row, which is reassigned to j.
/// Only entries whose value lies in [lo, hi) are considered. Returns the
/// number of reassigned rows. Throws if there are fewer such rows than
/// columns.
std::size_t repair_empty_columns(std::span<std::uint32_t> index, std::uint32_t lo,
                                 std::uint32_t hi);

}  // namespace sublora
