// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/projection_factory.hpp"

#include <stdexcept>
#include <string>

#include "sublora/dense.hpp"
#include "sublora/fastfood.hpp"
#include "sublora/onehot.hpp"
#include "sublora/structured.hpp"
#include "sublora/variants.hpp"

namespace sublora {

std::optional<std::size_t> natural_subspace_dim(ProjectionKind kind,
                                                const ParameterSpaceLayout& layout) {
  std::size_t d = 0;
  switch (kind) {
    case ProjectionKind::identity:
      return layout.total_dim();
    case ProjectionKind::vera:
      for (const auto& s : layout.modules()) d += s.m + s.r;
      return d;
    case ProjectionKind::lora_xs:
      for (const auto& s : layout.modules()) d += s.r * s.r;
      return d;
    default:
      return std::nullopt;
  }
}

std::unique_ptr<SubspaceMap> build_projection(ProjectionKind kind,
                                              const ParameterSpaceLayout& layout,
                                              std::size_t d, std::uint64_t seed) {
  const std::size_t D = layout.total_dim();
  if (auto natural = natural_subspace_dim(kind, layout)) {
    if (d != 0 && d != *natural)
      throw std::invalid_argument(std::string(to_string(kind)) + " projection has d = " +
                                  std::to_string(*natural) + " for this layout, not " +
                                  std::to_string(d));
    d = *natural;
  }
  switch (kind) {
    case ProjectionKind::onehot:
      return std::make_unique<OneHotProjection>(OneHotProjection::build(D, d, seed));
    case ProjectionKind::identity:
      return std::make_unique<OneHotProjection>(OneHotProjection::identity(D));
    case ProjectionKind::fastfood:
      return std::make_unique<FastfoodProjection>(FastfoodProjection::build(D, d, seed));
    case ProjectionKind::dense:
      return std::make_unique<DenseProjection>(DenseProjection::gaussian(D, d, seed));
    case ProjectionKind::vera:
      return std::make_unique<VeraReconstruction>(layout, seed);
    case ProjectionKind::lora_xs:
      return std::make_unique<LoraXsReconstruction>(layout, seed);
    case ProjectionKind::local_onehot:
      return std::make_unique<OneHotProjection>(build_local_onehot(layout, d, seed).combined);
    case ProjectionKind::nonuniform_onehot:
      return std::make_unique<OneHotProjection>(build_nonuniform_onehot(layout, d, seed));
    case ProjectionKind::custom:
      break;
  }
  throw std::invalid_argument("projection kind '" + std::string(to_string(kind)) +
                              "' cannot be rebuilt from a seed");
}

}  // namespace sublora
