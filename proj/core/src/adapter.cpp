// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/adapter.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sublora {
namespace {

using Index = Eigen::Index;

// Rows of W per frozen-product GEMM. Bounds the packed copy of W to
// kWeightTile x n regardless of m.
constexpr Index kWeightTile = 32;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

template <typename S>
AdapterLayer<S>::AdapterLayer(ModuleShape shape, std::size_t module_index, IndexTable index_a,
                              Matrix<S> norm_a, IndexTable index_b, Matrix<S> norm_b,
                              std::size_t source_dim, S scaling)
    : shape_(std::move(shape)),
      module_index_(module_index),
      index_a_(std::move(index_a)),
      norm_a_(std::move(norm_a)),
      index_b_(std::move(index_b)),
      norm_b_(std::move(norm_b)),
      source_dim_(source_dim),
      scaling_(scaling) {
  const auto n = static_cast<Index>(shape_.n), m = static_cast<Index>(shape_.m),
             r = static_cast<Index>(shape_.r);
  require(index_a_.rows() == n && index_a_.cols() == r && norm_a_.rows() == n && norm_a_.cols() == r,
          "A tables must be n x r");
  require(index_b_.rows() == r && index_b_.cols() == m && norm_b_.rows() == r && norm_b_.cols() == m,
          "B tables must be r x m");
}

template <typename S>
Matrix<S> AdapterLayer<S>::gather_a(std::span<const S> src) const {
  require(src.size() == source_dim_, "source vector length mismatch");
  Matrix<S> a(index_a_.rows(), index_a_.cols());
  for (Index c = 0; c < a.rows(); ++c)
    for (Index k = 0; k < a.cols(); ++k) a(c, k) = src[index_a_(c, k)] * norm_a_(c, k);
  return a;
}

template <typename S>
Matrix<S> AdapterLayer<S>::gather_b(std::span<const S> src) const {
  require(src.size() == source_dim_, "source vector length mismatch");
  Matrix<S> b(index_b_.rows(), index_b_.cols());
  for (Index k = 0; k < b.rows(); ++k)
    for (Index i = 0; i < b.cols(); ++i) b(k, i) = src[index_b_(k, i)] * norm_b_(k, i);
  return b;
}

template <typename S>
AdapterLayer<S> make_adapter(const ParameterSpaceLayout& layout, const OneHotProjection& projection,
                             std::string_view module, S scaling) {
  if (projection.full_dim() != layout.total_dim())
    throw std::invalid_argument("projection covers " + std::to_string(projection.full_dim()) +
                                " coordinates but the layout has " +
                                std::to_string(layout.total_dim()));
  const std::size_t mi = layout.index_of(module);
  const auto& s = layout.module(mi);
  const auto idx = projection.index();
  const auto norms = projection.norms();
  const auto n = static_cast<Index>(s.n), m = static_cast<Index>(s.m), r = static_cast<Index>(s.r);
  IndexTable ia(n, r), ib(r, m);
  Matrix<S> na(n, r), nb(r, m);
  for (Index k = 0; k < r; ++k)
    for (Index c = 0; c < n; ++c) {
      const auto g = layout.locate(mi, Block::A, static_cast<std::size_t>(k), static_cast<std::size_t>(c));
      ia(c, k) = idx[g];
      na(c, k) = static_cast<S>(norms[g]);
    }
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < r; ++k) {
      const auto g = layout.locate(mi, Block::B, static_cast<std::size_t>(i), static_cast<std::size_t>(k));
      ib(k, i) = idx[g];
      nb(k, i) = static_cast<S>(norms[g]);
    }
  return AdapterLayer<S>(s, mi, std::move(ia), std::move(na), std::move(ib), std::move(nb),
                         projection.subspace_dim(), scaling);
}

template <typename S>
AdapterLayer<S> make_direct_adapter(const ParameterSpaceLayout& layout, std::string_view module,
                                    S scaling) {
  const std::size_t mi = layout.index_of(module);
  const auto& s = layout.module(mi);
  const auto n = static_cast<Index>(s.n), m = static_cast<Index>(s.m), r = static_cast<Index>(s.r);
  IndexTable ia(n, r), ib(r, m);
  for (Index k = 0; k < r; ++k)
    for (Index c = 0; c < n; ++c)
      ia(c, k) = static_cast<std::uint32_t>(
          layout.locate(mi, Block::A, static_cast<std::size_t>(k), static_cast<std::size_t>(c)));
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < r; ++k)
      ib(k, i) = static_cast<std::uint32_t>(
          layout.locate(mi, Block::B, static_cast<std::size_t>(i), static_cast<std::size_t>(k)));
  return AdapterLayer<S>(s, mi, std::move(ia), Matrix<S>::Ones(n, r), std::move(ib),
                         Matrix<S>::Ones(r, m), layout.total_dim(), scaling);
}

template <typename S>
AdapterOutput<S> adapter_forward(const AdapterLayer<S>& layer, NoDeduce<std::span<const S>> src,
                                 const NoDeduce<Matrix<S>>& weight, const NoDeduce<Matrix<S>>& x) {
  const auto& s = layer.shape();
  require(weight.rows() == static_cast<Index>(s.m) && weight.cols() == static_cast<Index>(s.n),
          "weight must be m x n for module '" + s.name + "'");
  require(x.cols() == static_cast<Index>(s.n), "input width must equal n for module '" + s.name + "'");
  if (!x.allFinite()) throw std::domain_error("non-finite input activation in module '" + s.name + "'");

  AdapterOutput<S> out;
  out.cache.x = x;
  out.cache.a = layer.gather_a(src);
  out.cache.b = layer.gather_b(src);
  out.cache.z.noalias() = x * out.cache.a;
  out.y.resize(x.rows(), weight.rows());
  for (Index j = 0; j < weight.rows(); j += kWeightTile) {
    const Index t = std::min(kWeightTile, weight.rows() - j);
    out.y.middleCols(j, t).noalias() = x * weight.middleRows(j, t).transpose();
  }
  out.y.noalias() += layer.scaling() * (out.cache.z * out.cache.b);
  return out;
}

template <typename S>
AdapterGradients<S> adapter_backward(const AdapterLayer<S>& layer, const ForwardCache<S>& cache,
                                     const NoDeduce<Matrix<S>>& weight, const NoDeduce<Matrix<S>>& grad_y,
                                     NoDeduce<std::span<S>> grad_src) {
  const auto& s = layer.shape();
  require(grad_y.rows() == cache.x.rows() && grad_y.cols() == static_cast<Index>(s.m),
          "grad_y does not match the cached forward pass");
  require(cache.a.rows() == static_cast<Index>(s.n) && cache.b.cols() == static_cast<Index>(s.m),
          "cache does not belong to module '" + s.name + "'");
  require(grad_src.size() == layer.source_dim(), "gradient buffer length mismatch");

  const S scale = layer.scaling();
  AdapterGradients<S> g;
  const Matrix<S> grad_z = scale * (grad_y * cache.b.transpose());  // batch x r
  g.grad_b.noalias() = scale * (cache.z.transpose() * grad_y);       // r x m
  g.grad_a.noalias() = cache.x.transpose() * grad_z;                 // n x r
  g.grad_x.noalias() = grad_z * cache.a.transpose();
  for (Index j = 0; j < weight.rows(); j += kWeightTile) {
    const Index t = std::min(kWeightTile, weight.rows() - j);
    g.grad_x.noalias() += grad_y.middleCols(j, t) * weight.middleRows(j, t);
  }

  const auto& ib = layer.index_b();
  const auto& nb = layer.norm_b();
  for (Index i = 0; i < ib.cols(); ++i)
    for (Index k = 0; k < ib.rows(); ++k) grad_src[ib(k, i)] += g.grad_b(k, i) * nb(k, i);
  const auto& ia = layer.index_a();
  const auto& na = layer.norm_a();
  for (Index k = 0; k < ia.cols(); ++k)
    for (Index c = 0; c < ia.rows(); ++c) grad_src[ia(c, k)] += g.grad_a(c, k) * na(c, k);
  return g;
}

template <typename S>
Matrix<S> merge_weights(const AdapterLayer<S>& layer, NoDeduce<std::span<const S>> src,
                        const NoDeduce<Matrix<S>>& weight) {
  const auto& s = layer.shape();
  require(weight.rows() == static_cast<Index>(s.m) && weight.cols() == static_cast<Index>(s.n),
          "weight must be m x n for module '" + s.name + "'");
  const Matrix<S> a = layer.gather_a(src);
  const Matrix<S> b = layer.gather_b(src);
  Matrix<S> merged = weight;
  merged.noalias() += layer.scaling() * (b.transpose() * a.transpose());
  return merged;
}

#define SUBLORA_INSTANTIATE(S)                                                                   \
  template class AdapterLayer<S>;                                                                \
  template AdapterLayer<S> make_adapter<S>(const ParameterSpaceLayout&, const OneHotProjection&, \
                                           std::string_view, S);                                 \
  template AdapterLayer<S> make_direct_adapter<S>(const ParameterSpaceLayout&, std::string_view, \
                                                  S);                                            \
  template AdapterOutput<S> adapter_forward<S>(const AdapterLayer<S>&, std::span<const S>,       \
                                               const Matrix<S>&, const Matrix<S>&);              \
  template AdapterGradients<S> adapter_backward<S>(const AdapterLayer<S>&,                       \
                                                   const ForwardCache<S>&, const Matrix<S>&,     \
                                                   const Matrix<S>&, std::span<S>);              \
  template Matrix<S> merge_weights<S>(const AdapterLayer<S>&, std::span<const S>,                \
                                      const Matrix<S>&);

SUBLORA_INSTANTIATE(float)
SUBLORA_INSTANTIATE(double)
#undef SUBLORA_INSTANTIATE

}  // namespace sublora
