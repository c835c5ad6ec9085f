// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sublora/layout.hpp"
#include "sublora/onehot.hpp"

namespace sublora {

/// Per-layer one-hot projections for the global-vs-local ablation.
struct LocalOneHot {
  /// One projection per layer, over that layer's own coordinates.
  std::vector<OneHotProjection> layers;
  /// Global theta_D coordinates of each layer, ascending.
  std::vector<std::vector<std::size_t>> coordinates;
  /// Where each layer's slice starts in the concatenated theta_d.
  std::vector<std::size_t> subspace_offsets;
  /// The same map as a single block-structured projection over theta_D.
  OneHotProjection combined;
};

/// Layers come from layer_groups(). d_total is split evenly; the last layer
/// also takes the remainder. Layer l uses seed derive_seed(seed, l).
/// Throws if a layer would get d = 0 or more columns than coordinates.
LocalOneHot build_local_onehot(const ParameterSpaceLayout& layout, std::size_t d_total,
                               std::uint64_t seed);

/// A-block coordinates draw uniformly from [0, floor(2d/3)), B-block
/// coordinates from [floor(2d/3), d). Each partition is repaired separately,
/// so P^T P = I still holds. Requires d >= 3.
OneHotProjection build_nonuniform_onehot(const ParameterSpaceLayout& layout, std::size_t d,
                                         std::uint64_t seed);

}  // namespace sublora
