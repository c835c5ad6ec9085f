// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sublora/adapter.hpp"
#include "sublora/alloc_tracker.hpp"
#include "sublora/onehot.hpp"

namespace sublora {
namespace {

Matrix<double> random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  const auto v = testing::random_vector(static_cast<std::size_t>(rows * cols), gen);
  return Eigen::Map<const Matrix<double>>(v.data(), rows, cols);
}

TEST(Adapter, IdentityGathersRawBlocks) {
  const auto layout = register_module({}, {"w", 3, 4, 2});
  const auto p = OneHotProjection::identity(layout.total_dim());
  const auto layer = make_adapter<double>(layout, p, "w");
  std::vector<double> theta(layout.total_dim());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = static_cast<double>(i);
  const auto b = layer.gather_b(theta);  // r x m: B^T
  const auto a = layer.gather_a(theta);  // n x r: A^T
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(b(k, i), theta[layout.locate(0, Block::B, i, k)]);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(a(c, k), theta[layout.locate(0, Block::A, k, c)]);
}

TEST(Adapter, SharedColumnCouplesModules) {
  ParameterSpaceLayout layout;
  layout.register_module({"x", 2, 2, 1});
  layout.register_module({"y", 2, 2, 1});
  // Coordinate 0 (x's B) and coordinate 4 (y's B) share column 0.
  const auto p = OneHotProjection::from_assignment({0, 1, 1, 1, 0, 1, 1, 1}, 2);
  const auto lx = make_adapter<double>(layout, p, "x");
  const auto ly = make_adapter<double>(layout, p, "y");
  std::vector<double> theta = {0, 0};
  theta[0] = 1.0;
  EXPECT_NE(lx.gather_b(theta)(0, 0), 0.0);
  EXPECT_NE(ly.gather_b(theta)(0, 0), 0.0);
}

TEST(Adapter, Errors) {
  const auto layout = register_module({}, {"w", 3, 4, 2});
  EXPECT_THROW(make_adapter<double>(layout, OneHotProjection::identity(5), "w"), std::invalid_argument);
  EXPECT_THROW(make_adapter<double>(layout, OneHotProjection::identity(14), "nope"), std::out_of_range);
  const auto layer = make_direct_adapter<double>(layout, "w");
  std::vector<double> src(14, 0.1);
  Matrix<double> w = Matrix<double>::Zero(3, 4);
  EXPECT_THROW(adapter_forward(layer, src, w, Matrix<double>::Zero(2, 5)), std::invalid_argument);
  EXPECT_THROW(adapter_forward(layer, src, Matrix<double>::Zero(4, 3), Matrix<double>::Zero(2, 4)),
               std::invalid_argument);
  Matrix<double> bad = Matrix<double>::Zero(2, 4);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adapter_forward(layer, src, w, bad), std::domain_error);
  auto out = adapter_forward(layer, src, w, Matrix<double>::Zero(2, 4));
  std::vector<double> grad(14);
  EXPECT_THROW(adapter_backward(layer, out.cache, w, Matrix<double>::Zero(3, 3), grad),
               std::invalid_argument);
}

TEST(Adapter, ZeroThetaAndZeroBatch) {
  std::mt19937_64 gen(1);
  const auto layout = register_module({}, {"w", 5, 4, 2});
  const auto layer = make_direct_adapter<double>(layout, "w", 2.0);
  const Matrix<double> w = random_matrix(5, 4, gen);
  const Matrix<double> x = random_matrix(3, 4, gen);
  const std::vector<double> zero(layout.total_dim(), 0.0);
  EXPECT_LE((adapter_forward(layer, zero, w, x).y - x * w.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const auto theta = testing::random_vector(layout.total_dim(), gen);
  EXPECT_EQ(adapter_forward(layer, theta, w, Matrix<double>::Zero(3, 4)).y, Matrix<double>::Zero(3, 5));
}

TEST(Adapter, KnownUpdateAndMerge) {
  std::mt19937_64 gen(2);
  const std::size_t m = 4, n = 3, r = 3;
  const auto layout = register_module({}, {"w", m, n, r});
  const Matrix<double> b = random_matrix(m, r, gen), a = random_matrix(r, n, gen);
  const Matrix<double> delta = b * a;
  std::vector<double> theta(layout.total_dim());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < r; ++k) theta[layout.locate(0, Block::B, i, k)] = b(i, k);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t c = 0; c < n; ++c) theta[layout.locate(0, Block::A, k, c)] = a(k, c);
  const auto p = OneHotProjection::identity(layout.total_dim());
  const auto layer = make_adapter<double>(layout, p, "w");
  const Matrix<double> w = random_matrix(m, n, gen), x = random_matrix(6, n, gen);
  const Matrix<double> ref = x * (w + delta).transpose();
  EXPECT_LE((adapter_forward(layer, theta, w, x).y - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((merge_weights(layer, theta, w) - (w + delta)).cwiseAbs().maxCoeff(), 1e-14);
  const std::vector<double> zero(theta.size(), 0.0);
  EXPECT_EQ(merge_weights(layer, zero, w), w);
}

TEST(Adapter, MergedForwardMatchesAdapterForward) {
  std::mt19937_64 gen(3);
  const auto layout = register_module({}, {"w", 7, 5, 2});
  const auto p = OneHotProjection::build(layout.total_dim(), 9, 4);
  const auto layer = make_adapter<float>(layout, p, "w", 0.5f);
  const auto td = testing::random_vector(9, gen);
  const std::vector<float> theta(td.begin(), td.end());
  const Matrix<float> w = random_matrix(7, 5, gen).cast<float>(), x = random_matrix(4, 5, gen).cast<float>();
  const Matrix<float> merged = merge_weights(layer, theta, w);
  const Matrix<float> y = adapter_forward(layer, theta, w, x).y;
  EXPECT_LE((x * merged.transpose() - y).norm() / y.norm(), 1e-5);
}

TEST(Adapter, ZeroUpstreamGradient) {
  std::mt19937_64 gen(4);
  const auto layout = register_module({}, {"w", 4, 4, 2});
  const auto layer = make_direct_adapter<double>(layout, "w");
  const auto theta = testing::random_vector(layout.total_dim(), gen);
  const Matrix<double> w = random_matrix(4, 4, gen), x = random_matrix(3, 4, gen);
  const auto out = adapter_forward(layer, theta, w, x);
  std::vector<double> grad(layout.total_dim(), 0.0);
  const auto g = adapter_backward(layer, out.cache, w, Matrix<double>::Zero(3, 4), grad);
  EXPECT_TRUE(g.grad_x.isZero(0));
  EXPECT_TRUE(g.grad_a.isZero(0));
  EXPECT_TRUE(g.grad_b.isZero(0));
  for (double v : grad) EXPECT_EQ(v, 0.0);
}

// Scalar objective sum(y .* c) so that d/dy = c; gradients checked against a
// fourth-order central difference evaluated in double.
template <typename S>
double tiny_fd_error(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto layout = register_module({}, {"w", 6, 6, 2});
  const auto p = OneHotProjection::build(layout.total_dim(), 5, seed);
  const Matrix<double> w = random_matrix(6, 6, gen), x = random_matrix(4, 6, gen), c = random_matrix(4, 6, gen);
  const auto theta = testing::random_vector(5, gen, 0.5);

  const auto layer = make_adapter<S>(layout, p, "w", S(1.5));
  const std::vector<S> ts(theta.begin(), theta.end());
  const Matrix<S> ws = w.cast<S>();
  const auto out = adapter_forward(layer, ts, ws, x.cast<S>());
  std::vector<S> grad(5);
  adapter_backward(layer, out.cache, ws, c.cast<S>(), std::span<S>(grad));

  const auto ref_layer = make_adapter<double>(layout, p, "w", 1.5);
  auto f = [&](std::span<const double> t) {
    return adapter_forward(ref_layer, t, w, x).y.cwiseProduct(c).sum();
  };
  std::vector<double> fd(5), g(grad.begin(), grad.end());
  for (std::size_t j = 0; j < 5; ++j) fd[j] = testing::central_difference(f, theta, j, 1e-3);
  return testing::normwise_relative_error(g, fd);
}

TEST(AdapterProperty, FiniteDifferenceTinyInstance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_LE(tiny_fd_error<double>(seed), 1e-8);
    EXPECT_LE(tiny_fd_error<float>(seed), 1e-4);
  }
}

TEST(Adapter, SharedIndexGradientIsNormWeightedSum) {
  // Two B coordinates in column 0 (norm 1/sqrt 2), the other six in column 1.
  const auto layout = register_module({}, {"w", 2, 3, 1});
  std::vector<std::uint32_t> index(layout.total_dim(), 1);
  index[0] = index[1] = 0;
  const auto p = OneHotProjection::from_assignment(index, 2);
  const auto layer = make_adapter<double>(layout, p, "w");
  const auto direct = make_direct_adapter<double>(layout, "w");
  std::mt19937_64 gen(5);
  const Matrix<double> w = random_matrix(2, 3, gen), x = random_matrix(3, 3, gen), gy = random_matrix(3, 2, gen);
  const std::vector<double> theta = {0.3, -0.7};
  const auto theta_D = p.project<double>(theta);

  std::vector<double> g_d(2), g_D(layout.total_dim());
  adapter_backward(layer, adapter_forward(layer, theta, w, x).cache, w, gy, std::span<double>(g_d));
  adapter_backward(direct, adapter_forward(direct, theta_D, w, x).cache, w, gy, std::span<double>(g_D));
  EXPECT_NEAR(g_d[0], (g_D[0] + g_D[1]) / std::sqrt(2.0), 1e-14);
}

TEST(Adapter, GradXMatchesFormula) {
  std::mt19937_64 gen(6);
  const auto layout = register_module({}, {"w", 5, 4, 2});
  const auto layer = make_direct_adapter<double>(layout, "w", 0.5);
  const auto theta = testing::random_vector(layout.total_dim(), gen);
  const Matrix<double> w = random_matrix(5, 4, gen), x = random_matrix(3, 4, gen), gy = random_matrix(3, 5, gen);
  const auto out = adapter_forward(layer, theta, w, x);
  std::vector<double> grad(layout.total_dim());
  const auto g = adapter_backward(layer, out.cache, w, gy, grad);
  const Matrix<double> ref = gy * w + 0.5 * (gy * out.cache.b.transpose()) * out.cache.a.transpose();
  EXPECT_LE((g.grad_x - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adapter, ForwardNeverAllocatesFullUpdate) {
  // A 512 x 512 double update would be 2 MiB; the forward pass must stay far below.
  std::mt19937_64 gen(7);
  const std::size_t m = 512, n = 512, r = 4, batch = 2;
  const auto layout = register_module({}, {"w", m, n, r});
  const auto p = OneHotProjection::build(layout.total_dim(), 64, 1);
  const auto layer = make_adapter<double>(layout, p, "w");
  const auto theta = testing::random_vector(64, gen);
  const Matrix<double> w = Matrix<double>::Ones(m, n), x = random_matrix(batch, n, gen);
  alloc::PeakScope scope;
  const auto out = adapter_forward(layer, theta, w, x);
  const std::size_t peak = scope.peak();
  if (alloc::current_bytes() == 0) GTEST_SKIP() << "allocation tracking unavailable";
  EXPECT_LT(peak, m * n * sizeof(double) / 8);
  EXPECT_EQ(out.y.rows(), static_cast<Eigen::Index>(batch));
}

}  // namespace
}  // namespace sublora
