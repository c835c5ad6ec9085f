// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sublora/projection.hpp"

namespace sublora {

/// Unnormalized in-place Walsh-Hadamard transform, O(n log n).
/// Applying it twice multiplies the input by n.
template <typename S>
void fwht_inplace(std::span<S> v) {
  const std::size_t n = v.size();
  if (n == 0 || !std::has_single_bit(n))
    throw std::invalid_argument("fwht length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      S* lo = v.data() + i;
      S* hi = lo + h;
      for (std::size_t j = 0; j < h; ++j) {
        const S a = lo[j];
        const S b = hi[j];
        lo[j] = a + b;
        hi[j] = a - b;
      }
    }
  }
}

/// Parameters of one d_pad x d_pad Fastfood block
///   M = scale * H G Pi H B
/// with B a random sign diagonal, Pi a permutation ((Pi v)[k] = v[perm[k]]),
/// G a Gaussian diagonal and H the unnormalized Hadamard matrix.
struct FastfoodBlock {
  std::vector<std::int8_t> signs;
  std::vector<std::uint32_t> perm;
  std::vector<double> gauss;
  double scale = 0.0;
};

/// Structured random projection R^d -> R^D: theta_d is zero-padded to the
/// next power of two d_pad, every block maps it to d_pad outputs, and
/// ceil(D / d_pad) independent blocks are concatenated and truncated to D.
///
/// Block scale is 1 / sqrt(D * sum(g^2)), which makes E||P x||^2 = ||x||^2
/// over the whole stacked map. The map is isometric only approximately.
class FastfoodProjection final : public SubspaceMap {
 public:
  static FastfoodProjection build(std::size_t D, std::size_t d, std::uint64_t seed);

  ProjectionKind kind() const noexcept override { return ProjectionKind::fastfood; }
  std::uint64_t seed() const noexcept override { return seed_; }
  std::size_t full_dim() const noexcept override { return D_; }
  std::size_t subspace_dim() const noexcept override { return d_; }
  std::size_t padded_dim() const noexcept { return d_pad_; }
  std::span<const FastfoodBlock> blocks() const noexcept { return blocks_; }

  void apply(std::span<const float> theta_d, std::span<float> theta_D) const override;
  void apply(std::span<const double> theta_d, std::span<double> theta_D) const override;
  void apply_transpose(std::span<const float> g_D, std::span<float> g_d) const override;
  void apply_transpose(std::span<const double> g_D, std::span<double> g_d) const override;

  /// Applies block b (untruncated, d_pad x d_pad) to a padded vector.
  void apply_block(std::size_t b, std::span<double> padded) const;

  /// Block b as an explicit d_pad x d_pad matrix, assembled from its factors.
  Eigen::MatrixXd materialize_block(std::size_t b) const;

  /// Full D x d operator obtained by applying the map to basis vectors.
  Eigen::MatrixXd materialize_dense(std::size_t max_entries = 100'000'000) const;

 private:
  FastfoodProjection() = default;

  template <typename S>
  void apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const;
  template <typename S>
  void transpose_impl(std::span<const S> g_D, std::span<S> g_d) const;

  std::uint64_t seed_ = 0;
  std::size_t D_ = 0;
  std::size_t d_ = 0;
  std::size_t d_pad_ = 0;
  std::vector<FastfoodBlock> blocks_;
};

}  // namespace sublora
