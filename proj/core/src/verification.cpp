// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/verification.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sublora/philox.hpp"

namespace sublora {
namespace {

double norm2(std::span<const double> v) {
  long double s = 0;
  for (double x : v) s += static_cast<long double>(x) * x;
  return std::sqrt(static_cast<double>(s));
}

// P x - P 0, so affine maps contribute only their linear part.
std::vector<double> linear_apply(const SubspaceMap& p, std::span<const double> x) {
  auto out = p.project<double>(x);
  const std::vector<double> zero(p.subspace_dim(), 0.0);
  const auto offset = p.project<double>(zero);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= offset[i];
  return out;
}

}  // namespace

std::optional<double> isometry_error(const SubspaceMap& p, std::span<const double> x,
                                     std::span<const double> y, Precision precision) {
  std::vector<double> diff(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) diff[j] = x[j] - y[j];
  const double ref = norm2(diff);
  if (ref == 0.0) return std::nullopt;

  double projected = 0.0;
  if (precision == Precision::f64) {
    const auto px = p.project<double>(x);
    const auto py = p.project<double>(y);
    long double s = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const long double t = static_cast<long double>(px[i]) - py[i];
      s += t * t;
    }
    projected = std::sqrt(static_cast<double>(s));
  } else {
    std::vector<float> xf(x.begin(), x.end());
    std::vector<float> yf(y.begin(), y.end());
    const auto px = p.project<float>(xf);
    const auto py = p.project<float>(yf);
    long double s = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const long double t = static_cast<long double>(px[i]) - py[i];
      s += t * t;
    }
    projected = std::sqrt(static_cast<double>(s));
    // Reference distance of the rounded inputs.
    long double r = 0;
    for (std::size_t j = 0; j < xf.size(); ++j) {
      const long double t = static_cast<long double>(xf[j]) - yf[j];
      r += t * t;
    }
    const double ref_f = std::sqrt(static_cast<double>(r));
    if (ref_f == 0.0) return std::nullopt;
    return std::abs(projected - ref_f) / ref_f;
  }
  return std::abs(projected - ref) / ref;
}

IsometryReport verify_isometry(const SubspaceMap& p, std::size_t samples, double tol,
                               std::uint64_t seed, Precision precision) {
  const std::size_t d = p.subspace_dim();
  const CounterRng rng(seed, Stream::isometry_samples);
  IsometryReport report;
  double total = 0.0;
  std::vector<double> x(d), y(d);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t base = 2 * s * d;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = rng.normal(base + j);
      y[j] = rng.normal(base + d + j);
    }
    const auto err = isometry_error(p, x, y, precision);
    if (!err) {
      ++report.skipped;
      continue;
    }
    ++report.pairs;
    total += *err;
    report.max_rel_err = std::max(report.max_rel_err, *err);
  }
  report.mean_rel_err = report.pairs ? total / static_cast<double>(report.pairs) : 0.0;
  report.pass = report.max_rel_err <= tol;
  return report;
}

double orthonormality_error(const SubspaceMap& p, std::size_t max_columns) {
  const std::size_t d = p.subspace_dim();
  const std::size_t cols = std::min(d, max_columns);
  std::vector<double> e(d, 0.0);
  double worst = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    e[j] = 1.0;
    const auto column = linear_apply(p, e);
    e[j] = 0.0;
    const auto gram = p.project_transpose<double>(column);
    for (std::size_t k = 0; k < d; ++k)
      worst = std::max(worst, std::abs(gram[k] - (k == j ? 1.0 : 0.0)));
  }
  return worst;
}

double adjoint_error(const SubspaceMap& p, std::size_t samples, std::uint64_t seed) {
  const std::size_t d = p.subspace_dim();
  const std::size_t D = p.full_dim();
  const CounterRng rng(derive_seed(seed, 1), Stream::isometry_samples);
  double worst = 0.0;
  std::vector<double> x(d), g(D);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t base = s * (d + D);
    for (std::size_t j = 0; j < d; ++j) x[j] = rng.normal(base + j);
    for (std::size_t i = 0; i < D; ++i) g[i] = rng.normal(base + d + i);
    const auto px = linear_apply(p, x);
    const auto ptg = p.project_transpose<double>(g);
    long double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < D; ++i) lhs += static_cast<long double>(px[i]) * g[i];
    for (std::size_t j = 0; j < d; ++j) rhs += static_cast<long double>(x[j]) * ptg[j];
    const double scale = norm2(px) * norm2(g);
    if (scale == 0.0) continue;
    worst = std::max(worst, static_cast<double>(std::abs(lhs - rhs)) / scale);
  }
  return worst;
}

double left_inverse_error(const SubspaceMap& p, std::size_t samples, std::uint64_t seed) {
  const std::size_t d = p.subspace_dim();
  const CounterRng rng(derive_seed(seed, 2), Stream::isometry_samples);
  double worst = 0.0;
  std::vector<double> x(d);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < d; ++j) x[j] = rng.normal(s * d + j);
    const auto back = p.project_transpose<double>(linear_apply(p, x));
    std::vector<double> diff(d);
    for (std::size_t j = 0; j < d; ++j) diff[j] = back[j] - x[j];
    const double nx = norm2(x);
    if (nx > 0) worst = std::max(worst, norm2(diff) / nx);
  }
  return worst;
}

}  // namespace sublora
