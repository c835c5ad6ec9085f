// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/projection.hpp"

#include <stdexcept>
#include <string>

namespace sublora {

std::string_view to_string(ProjectionKind kind) noexcept {
  switch (kind) {
    case ProjectionKind::custom: return "custom";
    case ProjectionKind::onehot: return "onehot";
    case ProjectionKind::fastfood: return "fastfood";
    case ProjectionKind::dense: return "dense";
    case ProjectionKind::identity: return "identity";
    case ProjectionKind::vera: return "vera";
    case ProjectionKind::lora_xs: return "lora-xs";
    case ProjectionKind::local_onehot: return "local-onehot";
    case ProjectionKind::nonuniform_onehot: return "nonuniform-onehot";
  }
  return "unknown";
}

ProjectionKind parse_projection_kind(std::string_view text) {
  for (auto k : {ProjectionKind::onehot, ProjectionKind::fastfood, ProjectionKind::dense,
                 ProjectionKind::identity, ProjectionKind::vera, ProjectionKind::lora_xs,
                 ProjectionKind::local_onehot, ProjectionKind::nonuniform_onehot}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown projection kind '" + std::string(text) + "'");
}

bool is_onehot_family(ProjectionKind kind) noexcept {
  switch (kind) {
    case ProjectionKind::custom:
    case ProjectionKind::onehot:
    case ProjectionKind::identity:
    case ProjectionKind::local_onehot:
    case ProjectionKind::nonuniform_onehot:
      return true;
    default:
      return false;
  }
}

void SubspaceMap::check_apply_sizes(std::size_t in, std::size_t out) const {
  if (in != subspace_dim())
    throw std::invalid_argument("theta_d has length " + std::to_string(in) + ", expected " +
                                std::to_string(subspace_dim()));
  if (out != full_dim())
    throw std::invalid_argument("output has length " + std::to_string(out) + ", expected " +
                                std::to_string(full_dim()));
}

void SubspaceMap::check_transpose_sizes(std::size_t in, std::size_t out) const {
  if (in != full_dim())
    throw std::invalid_argument("gradient has length " + std::to_string(in) + ", expected " +
                                std::to_string(full_dim()));
  if (out != subspace_dim())
    throw std::invalid_argument("output has length " + std::to_string(out) + ", expected " +
                                std::to_string(subspace_dim()));
}

}  // namespace sublora
