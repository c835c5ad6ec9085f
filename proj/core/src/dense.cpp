// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/dense.hpp"

#include <cmath>
#include <stdexcept>

#include "sublora/philox.hpp"

namespace sublora {

Eigen::MatrixXd build_dense_gaussian(std::size_t D, std::size_t d, std::uint64_t seed,
                                     std::size_t max_entries) {
  if (d == 0 || d > D) throw std::invalid_argument("dense projection requires 1 <= d <= D");
  if (D > max_entries / d) throw std::length_error("dense projection exceeds the size guard");
  const CounterRng rng(seed, Stream::dense_gauss);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(d));
  const auto rows = static_cast<Eigen::Index>(D);
  const auto cols = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd G(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      G(i, j) = sigma * rng.normal(static_cast<std::uint64_t>(i) * d + static_cast<std::uint64_t>(j));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

DenseProjection::DenseProjection(Eigen::MatrixXd matrix, ProjectionKind kind, std::uint64_t seed)
    : matrix_(std::move(matrix)), matrix_f_(matrix_.cast<float>()), kind_(kind), seed_(seed) {}

void DenseProjection::apply(std::span<const float> t, std::span<float> o) const {
  check_apply_sizes(t.size(), o.size());
  Eigen::Map<const Eigen::VectorXf> x(t.data(), static_cast<Eigen::Index>(t.size()));
  Eigen::Map<Eigen::VectorXf>(o.data(), static_cast<Eigen::Index>(o.size())).noalias() = matrix_f_ * x;
}

void DenseProjection::apply(std::span<const double> t, std::span<double> o) const {
  check_apply_sizes(t.size(), o.size());
  Eigen::Map<const Eigen::VectorXd> x(t.data(), static_cast<Eigen::Index>(t.size()));
  Eigen::Map<Eigen::VectorXd>(o.data(), static_cast<Eigen::Index>(o.size())).noalias() = matrix_ * x;
}

void DenseProjection::apply_transpose(std::span<const float> g, std::span<float> o) const {
  check_transpose_sizes(g.size(), o.size());
  Eigen::Map<const Eigen::VectorXf> x(g.data(), static_cast<Eigen::Index>(g.size()));
  Eigen::Map<Eigen::VectorXf>(o.data(), static_cast<Eigen::Index>(o.size())).noalias() =
      matrix_f_.transpose() * x;
}

void DenseProjection::apply_transpose(std::span<const double> g, std::span<double> o) const {
  check_transpose_sizes(g.size(), o.size());
  Eigen::Map<const Eigen::VectorXd> x(g.data(), static_cast<Eigen::Index>(g.size()));
  Eigen::Map<Eigen::VectorXd>(o.data(), static_cast<Eigen::Index>(o.size())).noalias() =
      matrix_.transpose() * x;
}

}  // namespace sublora
