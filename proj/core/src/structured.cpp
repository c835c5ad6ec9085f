// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/structured.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sublora/philox.hpp"

namespace sublora {
namespace {

using Index = Eigen::Index;

Eigen::MatrixXd kaiming_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in,
                                const CounterRng& rng, std::uint64_t base) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Eigen::MatrixXd M(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      M(static_cast<Index>(i), static_cast<Index>(j)) =
          -bound + 2.0 * bound * rng.uniform(base + i * cols + j);
  return M;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& M) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
  for (Index j = 0; j < M.cols(); ++j)
    if (qr.matrixQR()(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

void check_guard(std::size_t D, std::size_t d, std::size_t max_entries) {
  if (d != 0 && D > max_entries / d)
    throw std::length_error("dense materialization exceeds the size guard");
}

}  // namespace

// ---------------------------------------------------------------- VeRA

VeraReconstruction::VeraReconstruction(ParameterSpaceLayout layout, std::uint64_t seed,
                                       FactorInit init)
    : layout_(std::move(layout)), seed_(seed) {
  if (layout_.empty()) throw std::invalid_argument("VeRA reconstruction needs at least one module");
  std::size_t m = 0, n = 0, r = 0;
  for (const auto& s : layout_.modules()) {
    m = std::max(m, s.m);
    n = std::max(n, s.n);
    r = std::max(r, s.r);
  }
  const CounterRng rng(seed, Stream::vera_factors);
  shared_b_ = kaiming_uniform(m, r, r, rng, 0);
  shared_a_ = kaiming_uniform(r, n, n, rng, m * r);
  if (init == FactorInit::orthonormal) shared_b_ = orthonormal_columns(shared_b_);
  init_offsets();
}

VeraReconstruction::VeraReconstruction(ParameterSpaceLayout layout, Eigen::MatrixXd shared_b,
                                       Eigen::MatrixXd shared_a)
    : layout_(std::move(layout)), shared_b_(std::move(shared_b)), shared_a_(std::move(shared_a)) {
  for (const auto& s : layout_.modules()) {
    if (static_cast<std::size_t>(shared_b_.rows()) < s.m ||
        static_cast<std::size_t>(shared_b_.cols()) < s.r ||
        static_cast<std::size_t>(shared_a_.rows()) < s.r ||
        static_cast<std::size_t>(shared_a_.cols()) < s.n)
      throw std::invalid_argument("shared factors do not cover module '" + s.name + "'");
  }
  init_offsets();
}

void VeraReconstruction::init_offsets() {
  offsets_.clear();
  d_ = 0;
  for (const auto& s : layout_.modules()) {
    offsets_.push_back(d_);
    d_ += s.m + s.r;
  }
}

template <typename S>
void VeraReconstruction::apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const {
  check_apply_sizes(theta_d.size(), theta_D.size());
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    const S* b = theta_d.data() + offsets_[l];
    const S* sc = b + s.m;
    for (std::size_t i = 0; i < s.m; ++i)
      for (std::size_t k = 0; k < s.r; ++k)
        theta_D[o.b_offset + i * s.r + k] =
            b[i] * static_cast<S>(shared_b_(static_cast<Index>(i), static_cast<Index>(k)));
    for (std::size_t k = 0; k < s.r; ++k)
      for (std::size_t c = 0; c < s.n; ++c)
        theta_D[o.a_offset + k * s.n + c] =
            sc[k] * static_cast<S>(shared_a_(static_cast<Index>(k), static_cast<Index>(c)));
  }
}

template <typename S>
void VeraReconstruction::transpose_impl(std::span<const S> g_D, std::span<S> g_d) const {
  check_transpose_sizes(g_D.size(), g_d.size());
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    S* b = g_d.data() + offsets_[l];
    S* sc = b + s.m;
    for (std::size_t i = 0; i < s.m; ++i) {
      S acc{0};
      for (std::size_t k = 0; k < s.r; ++k)
        acc += g_D[o.b_offset + i * s.r + k] *
               static_cast<S>(shared_b_(static_cast<Index>(i), static_cast<Index>(k)));
      b[i] = acc;
    }
    for (std::size_t k = 0; k < s.r; ++k) {
      S acc{0};
      for (std::size_t c = 0; c < s.n; ++c)
        acc += g_D[o.a_offset + k * s.n + c] *
               static_cast<S>(shared_a_(static_cast<Index>(k), static_cast<Index>(c)));
      sc[k] = acc;
    }
  }
}

void VeraReconstruction::apply(std::span<const float> t, std::span<float> o) const { apply_impl(t, o); }
void VeraReconstruction::apply(std::span<const double> t, std::span<double> o) const { apply_impl(t, o); }
void VeraReconstruction::apply_transpose(std::span<const float> g, std::span<float> o) const {
  transpose_impl(g, o);
}
void VeraReconstruction::apply_transpose(std::span<const double> g, std::span<double> o) const {
  transpose_impl(g, o);
}

Eigen::MatrixXd VeraReconstruction::materialize_dense(std::size_t max_entries) const {
  const std::size_t D = full_dim();
  check_guard(D, d_, max_entries);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Index>(D), static_cast<Index>(d_));
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    for (std::size_t i = 0; i < s.m; ++i) {
      const auto col = static_cast<Index>(offsets_[l] + i);
      for (std::size_t k = 0; k < s.r; ++k)
        P(static_cast<Index>(o.b_offset + i * s.r + k), col) =
            shared_b_(static_cast<Index>(i), static_cast<Index>(k));
    }
    for (std::size_t k = 0; k < s.r; ++k) {
      const auto col = static_cast<Index>(offsets_[l] + s.m + k);
      for (std::size_t c = 0; c < s.n; ++c)
        P(static_cast<Index>(o.a_offset + k * s.n + c), col) =
            shared_a_(static_cast<Index>(k), static_cast<Index>(c));
    }
  }
  return P;
}

// ------------------------------------------------------------- LoRA-XS

LoraXsReconstruction::LoraXsReconstruction(ParameterSpaceLayout layout, std::uint64_t seed,
                                           FactorInit init)
    : layout_(std::move(layout)), seed_(seed) {
  std::uint64_t base = 0;
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const CounterRng rng(derive_seed(seed, l), Stream::loraxs_factors);
    auto pb = kaiming_uniform(s.m, s.r, s.r, rng, base);
    if (init == FactorInit::orthonormal) pb = orthonormal_columns(pb);
    factors_b_.push_back(std::move(pb));
    factors_a_.push_back(kaiming_uniform(s.r, s.n, s.n, rng, base + s.m * s.r));
  }
  init_offsets();
}

LoraXsReconstruction::LoraXsReconstruction(ParameterSpaceLayout layout,
                                           std::vector<Eigen::MatrixXd> factors_b,
                                           std::vector<Eigen::MatrixXd> factors_a)
    : layout_(std::move(layout)), factors_b_(std::move(factors_b)), factors_a_(std::move(factors_a)) {
  if (factors_b_.size() != layout_.size() || factors_a_.size() != layout_.size())
    throw std::invalid_argument("one factor pair per module is required");
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    if (factors_b_[l].rows() != static_cast<Index>(s.m) || factors_b_[l].cols() != static_cast<Index>(s.r) ||
        factors_a_[l].rows() != static_cast<Index>(s.r) || factors_a_[l].cols() != static_cast<Index>(s.n))
      throw std::invalid_argument("factor shapes do not match module '" + s.name + "'");
  }
  init_offsets();
}

void LoraXsReconstruction::init_offsets() {
  offsets_.clear();
  d_ = 0;
  for (const auto& s : layout_.modules()) {
    offsets_.push_back(d_);
    d_ += s.r * s.r;
  }
}

template <typename S>
void LoraXsReconstruction::apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const {
  check_apply_sizes(theta_d.size(), theta_D.size());
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    const auto& pb = factors_b_[l];
    const auto& pa = factors_a_[l];
    const S* core = theta_d.data() + offsets_[l];  // core[c * r + k] = R[k][c]
    for (std::size_t i = 0; i < s.m; ++i)
      for (std::size_t c = 0; c < s.r; ++c) {
        S acc{0};
        for (std::size_t k = 0; k < s.r; ++k)
          acc += static_cast<S>(pb(static_cast<Index>(i), static_cast<Index>(k))) * core[c * s.r + k];
        theta_D[o.b_offset + i * s.r + c] = acc;
      }
    for (std::size_t k = 0; k < s.r; ++k)
      for (std::size_t c = 0; c < s.n; ++c)
        theta_D[o.a_offset + k * s.n + c] = static_cast<S>(pa(static_cast<Index>(k), static_cast<Index>(c)));
  }
}

template <typename S>
void LoraXsReconstruction::transpose_impl(std::span<const S> g_D, std::span<S> g_d) const {
  check_transpose_sizes(g_D.size(), g_d.size());
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    const auto& pb = factors_b_[l];
    S* core = g_d.data() + offsets_[l];
    for (std::size_t c = 0; c < s.r; ++c)
      for (std::size_t k = 0; k < s.r; ++k) {
        S acc{0};
        for (std::size_t i = 0; i < s.m; ++i)
          acc += static_cast<S>(pb(static_cast<Index>(i), static_cast<Index>(k))) *
                 g_D[o.b_offset + i * s.r + c];
        core[c * s.r + k] = acc;
      }
  }
}

void LoraXsReconstruction::apply(std::span<const float> t, std::span<float> o) const { apply_impl(t, o); }
void LoraXsReconstruction::apply(std::span<const double> t, std::span<double> o) const { apply_impl(t, o); }
void LoraXsReconstruction::apply_transpose(std::span<const float> g, std::span<float> o) const {
  transpose_impl(g, o);
}
void LoraXsReconstruction::apply_transpose(std::span<const double> g, std::span<double> o) const {
  transpose_impl(g, o);
}

Eigen::MatrixXd LoraXsReconstruction::materialize_dense(std::size_t max_entries) const {
  const std::size_t D = full_dim();
  check_guard(D, d_, max_entries);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Index>(D), static_cast<Index>(d_));
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    for (std::size_t c = 0; c < s.r; ++c)
      for (std::size_t k = 0; k < s.r; ++k) {
        const auto col = static_cast<Index>(offsets_[l] + c * s.r + k);
        for (std::size_t i = 0; i < s.m; ++i)
          P(static_cast<Index>(o.b_offset + i * s.r + c), col) =
              factors_b_[l](static_cast<Index>(i), static_cast<Index>(k));
      }
  }
  return P;
}

Eigen::VectorXd LoraXsReconstruction::offset() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Index>(full_dim()));
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& s = layout_.module(l);
    const auto& o = layout_.offsets(l);
    for (std::size_t k = 0; k < s.r; ++k)
      for (std::size_t j = 0; j < s.n; ++j)
        c(static_cast<Index>(o.a_offset + k * s.n + j)) = factors_a_[l](static_cast<Index>(k), static_cast<Index>(j));
  }
  return c;
}

}  // namespace sublora
