// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <type_traits>

#include "sublora/layout.hpp"
#include "sublora/onehot.hpp"
#include "sublora/tensor.hpp"

namespace sublora {

/// One adapted linear module reading its low-rank factors straight out of a
/// source vector through index/norm tables:
///   A(c, k) = src[index_a(c, k)] * norm_a(c, k)     (n x r)
///   B(k, i) = src[index_b(k, i)] * norm_b(k, i)     (r x m)
/// Tables use the runtime orientation (A is stored transposed relative to the
/// layout's r x n block, B likewise), so the forward pass is x A B.
///
/// With a one-hot projection the source is theta_d itself. A "direct" adapter
/// has locate() indices and unit norms and reads theta_D; that is how every
/// non-one-hot projection is trained.
template <typename S>
class AdapterLayer {
 public:
  AdapterLayer(ModuleShape shape, std::size_t module_index, IndexTable index_a,
               Matrix<S> norm_a, IndexTable index_b, Matrix<S> norm_b,
               std::size_t source_dim, S scaling);

  const ModuleShape& shape() const noexcept { return shape_; }
  std::size_t module_index() const noexcept { return module_index_; }
  std::size_t source_dim() const noexcept { return source_dim_; }
  S scaling() const noexcept { return scaling_; }

  const IndexTable& index_a() const noexcept { return index_a_; }
  const IndexTable& index_b() const noexcept { return index_b_; }
  const Matrix<S>& norm_a() const noexcept { return norm_a_; }
  const Matrix<S>& norm_b() const noexcept { return norm_b_; }

  Matrix<S> gather_a(std::span<const S> src) const;
  Matrix<S> gather_b(std::span<const S> src) const;

 private:
  ModuleShape shape_;
  std::size_t module_index_;
  IndexTable index_a_;
  Matrix<S> norm_a_;
  IndexTable index_b_;
  Matrix<S> norm_b_;
  std::size_t source_dim_;
  S scaling_;
};

/// Slices the global projection; no new randomness. Norms therefore reflect
/// column counts across all modules.
template <typename S>
AdapterLayer<S> make_adapter(const ParameterSpaceLayout& layout, const OneHotProjection& projection,
                             std::string_view module, S scaling = S{1});

/// Reads theta_D directly (identity tables).
template <typename S>
AdapterLayer<S> make_direct_adapter(const ParameterSpaceLayout& layout, std::string_view module,
                                    S scaling = S{1});

/// Keeps a parameter out of template argument deduction so that vectors and
/// Eigen expressions convert implicitly.
template <typename T>
using NoDeduce = std::type_identity_t<T>;

template <typename S>
struct ForwardCache {
  Matrix<S> x;  // batch x n
  Matrix<S> a;  // n x r
  Matrix<S> b;  // r x m
  Matrix<S> z;  // batch x r, z = x a
};

template <typename S>
struct AdapterOutput {
  Matrix<S> y;  // batch x m
  ForwardCache<S> cache;
};

template <typename S>
struct AdapterGradients {
  Matrix<S> grad_x;  // batch x n
  Matrix<S> grad_a;  // n x r, runtime orientation
  Matrix<S> grad_b;  // r x m
};

/// y = x W^T + scaling * (x A) B, W is the frozen m x n weight. The m x n
/// update B^T A^T is never formed. Throws std::domain_error on non-finite
/// input activations.
template <typename S>
AdapterOutput<S> adapter_forward(const AdapterLayer<S>& layer, NoDeduce<std::span<const S>> src,
                                 const NoDeduce<Matrix<S>>& weight, const NoDeduce<Matrix<S>>& x);

/// Returns grad_x and the factor gradients, and scatter-adds each factor
/// entry's gradient times its norm into grad_src (same length as the source)
/// in ascending theta_D coordinate order of this module.
template <typename S>
AdapterGradients<S> adapter_backward(const AdapterLayer<S>& layer, const ForwardCache<S>& cache,
                                     const NoDeduce<Matrix<S>>& weight, const NoDeduce<Matrix<S>>& grad_y,
                                     NoDeduce<std::span<S>> grad_src);

/// W + scaling * (B A) in the m x n orientation, for export.
template <typename S>
Matrix<S> merge_weights(const AdapterLayer<S>& layer, NoDeduce<std::span<const S>> src,
                        const NoDeduce<Matrix<S>>& weight);

}  // namespace sublora
