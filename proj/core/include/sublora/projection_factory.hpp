// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "sublora/layout.hpp"
#include "sublora/projection.hpp"

namespace sublora {

/// Subspace dimension fixed by the layout for identity, vera and lora-xs;
/// nullopt for kinds where d is a free parameter.
std::optional<std::size_t> natural_subspace_dim(ProjectionKind kind,
                                                const ParameterSpaceLayout& layout);

/// Builds any seed-reproducible projection over layout.total_dim(). For the
/// kinds with a natural dimension `d` must equal it (or be 0, meaning "use
/// it"). Throws std::invalid_argument for ProjectionKind::custom.
std::unique_ptr<SubspaceMap> build_projection(ProjectionKind kind,
                                              const ParameterSpaceLayout& layout,
                                              std::size_t d, std::uint64_t seed);

}  // namespace sublora
