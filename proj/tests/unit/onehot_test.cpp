// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sublora/onehot.hpp"
#include "sublora/verification.hpp"

namespace sublora {
namespace {

OneHotProjection five_by_two() {
  return OneHotProjection::from_assignment({0, 1, 0, 0, 1}, 2);
}

TEST(OneHot, HandExampleCountsAndNorms) {
  const auto p = five_by_two();
  EXPECT_EQ(std::vector<std::uint32_t>(p.counts().begin(), p.counts().end()),
            (std::vector<std::uint32_t>{3, 2}));
  const double a = 1 / std::sqrt(3.0), b = 1 / std::sqrt(2.0);
  const std::vector<double> expect = {a, b, a, a, b};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(p.norms()[i], expect[i]);
}

TEST(OneHot, HandExampleApply) {
  const auto p = five_by_two();
  const std::vector<double> theta = {std::sqrt(3.0), std::sqrt(2.0)};
  for (double v : p.project<double>(theta)) EXPECT_NEAR(v, 1.0, 1e-15);
  const std::vector<double> zero(2, 0.0);
  for (double v : p.project<double>(zero)) EXPECT_EQ(v, 0.0);
}

TEST(OneHot, HandExampleTranspose) {
  const auto p = five_by_two();
  const std::vector<double> g(5, 1.0);
  const auto out = p.project_transpose<double>(g);
  EXPECT_NEAR(out[0], std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(out[1], std::sqrt(2.0), 1e-15);
}

TEST(OneHot, HandExampleDense) {
  const Eigen::MatrixXd m = five_by_two().materialize_dense();
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 2);
  for (int i : {0, 2, 3}) expect(i, 0) = 1 / std::sqrt(3.0);
  for (int i : {1, 4}) expect(i, 1) = 1 / std::sqrt(2.0);
  EXPECT_EQ(m, expect);
  EXPECT_THROW((void)five_by_two().materialize_dense(9), std::length_error);
}

TEST(OneHot, IdentityCase) {
  const auto p = OneHotProjection::identity(6);
  EXPECT_EQ(p.kind(), ProjectionKind::identity);
  for (auto c : p.counts()) EXPECT_EQ(c, 1u);
  for (auto n : p.norms()) EXPECT_EQ(n, 1.0);
  EXPECT_EQ(p.materialize_dense(), Eigen::MatrixXd::Identity(6, 6));
  const std::vector<double> x = {1, -2, 3, 4.5, 0, 7};
  EXPECT_EQ(p.project<double>(x), x);
  EXPECT_EQ(p.project_transpose<double>(x), x);
}

TEST(OneHot, SquareBuildIsAPermutation) {
  const auto p = OneHotProjection::build(50, 50, 3);
  for (auto c : p.counts()) EXPECT_EQ(c, 1u);
  EXPECT_EQ(orthonormality_error(p, 50), 0.0);
}

TEST(OneHot, Errors) {
  EXPECT_THROW(OneHotProjection::build(5, 6, 0), std::invalid_argument);
  EXPECT_THROW(OneHotProjection::build(5, 0, 0), std::invalid_argument);
  EXPECT_THROW(OneHotProjection::from_assignment({0, 0, 2}, 3), std::invalid_argument);
  EXPECT_THROW(OneHotProjection::from_assignment({0, 3}, 3), std::invalid_argument);
  const auto p = five_by_two();
  std::vector<double> shortv(1), out(5);
  EXPECT_THROW(p.apply(std::span<const double>(shortv), std::span<double>(out)), std::invalid_argument);
  std::vector<double> g(4), gd(2);
  EXPECT_THROW(p.apply_transpose(std::span<const double>(g), std::span<double>(gd)), std::invalid_argument);
}

TEST(OneHot, LargeBuildHasNoEmptyColumns) {
  const auto p = OneHotProjection::build(294'912, 23'040, 11);
  EXPECT_EQ(p.subspace_dim(), 23'040u);
  for (auto c : p.counts()) ASSERT_GE(c, 1u);
  EXPECT_EQ(std::accumulate(p.counts().begin(), p.counts().end(), std::size_t{0}), 294'912u);
}

TEST(OneHot, RepairRule) {
  // Column 2 and 3 are empty. Column 0 has the most rows and gives up its
  // lowest row (0) to column 2; then columns 0 and 1 tie at 2 rows and the
  // lower id (0) gives up row 1.
  std::vector<std::uint32_t> index = {0, 0, 1, 0, 1};
  EXPECT_EQ(repair_empty_columns(index, 0, 4), 2u);
  EXPECT_EQ(index, (std::vector<std::uint32_t>{2, 3, 1, 0, 1}));
  std::vector<std::uint32_t> tiny = {0, 0};
  EXPECT_THROW(repair_empty_columns(tiny, 0, 3), std::invalid_argument);
}

TEST(OneHot, ReproducibleFromSeed) {
  const auto a = OneHotProjection::build(1000, 37, 99);
  const auto b = OneHotProjection::build(1000, 37, 99);
  const auto c = OneHotProjection::build(1000, 37, 100);
  EXPECT_TRUE(std::equal(a.index().begin(), a.index().end(), b.index().begin()));
  EXPECT_FALSE(std::equal(a.index().begin(), a.index().end(), c.index().begin()));
}

// Random instances: structural invariants, P^T P = I, left inverse, adjoint
// identity, the norm inequality for P^T and agreement with the dense oracle.
TEST(OneHotProperty, Invariants) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 300)(gen);
    const std::size_t D = std::uniform_int_distribution<std::size_t>(d, 3000)(gen);
    const auto p = OneHotProjection::build(D, d, gen());
    std::size_t total = 0;
    for (std::size_t j = 0; j < d; ++j) {
      ASSERT_GE(p.counts()[j], 1u);
      total += p.counts()[j];
    }
    ASSERT_EQ(total, D);
    for (std::size_t i = 0; i < D; ++i)
      ASSERT_DOUBLE_EQ(p.norms()[i], 1 / std::sqrt(static_cast<double>(p.counts()[p.index()[i]])));

    const auto x = testing::random_vector(d, gen);
    const auto px = p.project<double>(x);
    const auto back = p.project_transpose<double>(px);
    for (std::size_t j = 0; j < d; ++j) ASSERT_NEAR(back[j], x[j], 1e-12 * (1 + std::abs(x[j])));

    const Eigen::MatrixXd dense = p.materialize_dense();
    const Eigen::VectorXd ref = dense * Eigen::Map<const Eigen::VectorXd>(x.data(), d);
    for (std::size_t i = 0; i < D; ++i) ASSERT_NEAR(px[i], ref(i), 1e-14);

    const auto g = testing::random_vector(D, gen);
    const auto ptg = p.project_transpose<double>(g);
    double lhs = 0, rhs = 0, ng = 0, nptg = 0;
    for (std::size_t i = 0; i < D; ++i) lhs += px[i] * g[i], ng += g[i] * g[i];
    for (std::size_t j = 0; j < d; ++j) rhs += x[j] * ptg[j], nptg += ptg[j] * ptg[j];
    ASSERT_NEAR(lhs, rhs, 1e-10 * std::sqrt(ng));
    ASSERT_LE(nptg, ng * (1 + 1e-12));
  }
}

TEST(OneHotProperty, IsometryFloatAndDouble) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 500)(gen);
    const std::size_t D = std::uniform_int_distribution<std::size_t>(d, 5000)(gen);
    const auto p = OneHotProjection::build(D, d, gen());
    EXPECT_TRUE(verify_isometry(p, 20, 1e-12, trial, Precision::f64).pass);
    EXPECT_TRUE(verify_isometry(p, 20, 1e-5, trial, Precision::f32).pass);
  }
}

TEST(OneHot, ThreadedApplyMatchesSerial) {
  auto p = OneHotProjection::build(100'000, 500, 4);
  std::mt19937_64 gen(1);
  const auto xd = testing::random_vector(500, gen);
  const std::vector<float> x(xd.begin(), xd.end());
  const auto serial = p.project<float>(x);
  p.set_threads(4);
  EXPECT_EQ(p.project<float>(x), serial);
  const auto g = testing::random_vector(100'000, gen);
  p.set_threads(1);
  const auto t1 = p.project_transpose<double>(g);
  p.set_threads(3);
  EXPECT_EQ(p.project_transpose<double>(g), t1);
}

TEST(Verification, OneHotDiagnostics) {
  const auto p = OneHotProjection::build(2000, 100, 5);
  EXPECT_LE(orthonormality_error(p, 100), 1e-12);
  EXPECT_LE(adjoint_error(p, 10, 1), 1e-12);
  EXPECT_LE(left_inverse_error(p, 10, 1), 1e-12);
  const std::vector<double> x = {1.0, 2.0};
  EXPECT_FALSE(isometry_error(five_by_two(), x, x).has_value());
}

}  // namespace
}  // namespace sublora
