// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/fastfood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sublora/philox.hpp"

namespace sublora {

FastfoodProjection FastfoodProjection::build(std::size_t D, std::size_t d, std::uint64_t seed) {
  if (d == 0 || d > D) throw std::invalid_argument("fastfood requires 1 <= d <= D");
  FastfoodProjection p;
  p.seed_ = seed;
  p.D_ = D;
  p.d_ = d;
  p.d_pad_ = std::bit_ceil(d);
  const std::size_t n = p.d_pad_;
  const std::size_t nblocks = (D + n - 1) / n;
  p.blocks_.resize(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::uint64_t block_seed = derive_seed(seed, b);
    const CounterRng signs(block_seed, Stream::fastfood_signs);
    const CounterRng perm(block_seed, Stream::fastfood_perm);
    const CounterRng gauss(block_seed, Stream::fastfood_gauss);
    auto& blk = p.blocks_[b];
    blk.signs.resize(n);
    blk.gauss.resize(n);
    blk.perm.resize(n);
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      blk.signs[k] = (signs.bits64(k) & 1u) ? std::int8_t{1} : std::int8_t{-1};
      blk.gauss[k] = gauss.normal(k);
      sum_sq += blk.gauss[k] * blk.gauss[k];
    }
    std::iota(blk.perm.begin(), blk.perm.end(), 0u);
    for (std::size_t k = n; k > 1; --k) {
      const auto j = static_cast<std::size_t>(perm.below(k, k));
      std::swap(blk.perm[k - 1], blk.perm[j]);
    }
    blk.scale = 1.0 / std::sqrt(static_cast<double>(D) * sum_sq);
  }
  return p;
}

void FastfoodProjection::apply_block(std::size_t b, std::span<double> v) const {
  const auto& blk = blocks_.at(b);
  const std::size_t n = d_pad_;
  if (v.size() != n) throw std::invalid_argument("block input must have padded length");
  for (std::size_t k = 0; k < n; ++k) v[k] *= blk.signs[k];
  fwht_inplace(v);
  std::vector<double> tmp(n);
  for (std::size_t k = 0; k < n; ++k) tmp[k] = v[blk.perm[k]] * blk.gauss[k];
  fwht_inplace(std::span<double>(tmp));
  for (std::size_t k = 0; k < n; ++k) v[k] = tmp[k] * blk.scale;
}

template <typename S>
void FastfoodProjection::apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const {
  check_apply_sizes(theta_d.size(), theta_D.size());
  const std::size_t n = d_pad_;
  detail::parallel_chunks(blocks_.size(), threads(), [&](std::size_t b0, std::size_t b1) {
    std::vector<S> u(n), w(n);
    for (std::size_t b = b0; b < b1; ++b) {
      const auto& blk = blocks_[b];
      for (std::size_t k = 0; k < d_; ++k) u[k] = blk.signs[k] > 0 ? theta_d[k] : -theta_d[k];
      std::fill(u.begin() + static_cast<std::ptrdiff_t>(d_), u.end(), S{0});
      fwht_inplace(std::span<S>(u));
      for (std::size_t k = 0; k < n; ++k) w[k] = u[blk.perm[k]] * static_cast<S>(blk.gauss[k]);
      fwht_inplace(std::span<S>(w));
      const std::size_t begin = b * n;
      const std::size_t end = std::min(D_, begin + n);
      const auto scale = static_cast<S>(blk.scale);
      for (std::size_t i = begin; i < end; ++i) theta_D[i] = w[i - begin] * scale;
    }
  });
}

// M^T = scale * B H G Pi^T H, since H and the diagonals are symmetric.
template <typename S>
void FastfoodProjection::transpose_impl(std::span<const S> g_D, std::span<S> g_d) const {
  check_transpose_sizes(g_D.size(), g_d.size());
  const std::size_t n = d_pad_;
  std::vector<S> u(n), w(n);
  std::fill(g_d.begin(), g_d.end(), S{0});
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    const std::size_t begin = b * n;
    const std::size_t end = std::min(D_, begin + n);
    std::fill(u.begin(), u.end(), S{0});
    for (std::size_t i = begin; i < end; ++i) u[i - begin] = g_D[i];
    fwht_inplace(std::span<S>(u));
    for (std::size_t k = 0; k < n; ++k) w[blk.perm[k]] = u[k] * static_cast<S>(blk.gauss[k]);
    fwht_inplace(std::span<S>(w));
    const auto scale = static_cast<S>(blk.scale);
    for (std::size_t k = 0; k < d_; ++k) {
      const S v = w[k] * scale;
      g_d[k] += blk.signs[k] > 0 ? v : -v;
    }
  }
}

void FastfoodProjection::apply(std::span<const float> t, std::span<float> o) const { apply_impl(t, o); }
void FastfoodProjection::apply(std::span<const double> t, std::span<double> o) const { apply_impl(t, o); }
void FastfoodProjection::apply_transpose(std::span<const float> g, std::span<float> o) const {
  transpose_impl(g, o);
}
void FastfoodProjection::apply_transpose(std::span<const double> g, std::span<double> o) const {
  transpose_impl(g, o);
}

Eigen::MatrixXd FastfoodProjection::materialize_block(std::size_t b) const {
  const auto& blk = blocks_.at(b);
  const auto n = static_cast<Eigen::Index>(d_pad_);
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      H(i, j) = (std::popcount(static_cast<std::uint64_t>(i & j)) & 1) ? -1.0 : 1.0;
  Eigen::MatrixXd Pi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) Pi(k, blk.perm[static_cast<std::size_t>(k)]) = 1.0;
  Eigen::VectorXd g(n), s(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    g(k) = blk.gauss[static_cast<std::size_t>(k)];
    s(k) = blk.signs[static_cast<std::size_t>(k)];
  }
  return blk.scale * H * g.asDiagonal() * Pi * H * s.asDiagonal();
}

Eigen::MatrixXd FastfoodProjection::materialize_dense(std::size_t max_entries) const {
  if (D_ > max_entries / d_) throw std::length_error("dense materialization exceeds the size guard");
  Eigen::MatrixXd P(static_cast<Eigen::Index>(D_), static_cast<Eigen::Index>(d_));
  std::vector<double> e(d_, 0.0), col(D_);
  for (std::size_t j = 0; j < d_; ++j) {
    e[j] = 1.0;
    apply(std::span<const double>(e), std::span<double>(col));
    e[j] = 0.0;
    for (std::size_t i = 0; i < D_; ++i)
      P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return P;
}

}  // namespace sublora
