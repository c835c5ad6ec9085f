// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/variants.hpp"

#include <stdexcept>
#include <string>

#include "sublora/philox.hpp"

namespace sublora {

LocalOneHot build_local_onehot(const ParameterSpaceLayout& layout, std::size_t d_total,
                               std::uint64_t seed) {
  const auto groups = layer_groups(layout);
  if (groups.empty()) throw std::invalid_argument("layout has no modules");
  const std::size_t L = groups.size();
  const std::size_t base = d_total / L;

  LocalOneHot out{{}, {}, {}, OneHotProjection::identity(1)};
  std::vector<std::uint32_t> combined(layout.total_dim());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<std::size_t> coords;
    for (auto mi : groups[l]) {
      const auto& s = layout.module(mi);
      const auto first = layout.offsets(mi).b_offset;
      for (std::size_t i = 0; i < s.size(); ++i) coords.push_back(first + i);
    }
    const std::size_t d_layer = l + 1 == L ? d_total - base * (L - 1) : base;
    if (d_layer == 0 || d_layer > coords.size())
      throw std::invalid_argument("layer " + std::to_string(l) + " would get d = " +
                                  std::to_string(d_layer) + " for " +
                                  std::to_string(coords.size()) + " coordinates");
    auto proj = OneHotProjection::build(coords.size(), d_layer, derive_seed(seed, l));
    const auto idx = proj.index();
    for (std::size_t i = 0; i < coords.size(); ++i)
      combined[coords[i]] = static_cast<std::uint32_t>(offset + idx[i]);
    out.subspace_offsets.push_back(offset);
    out.layers.push_back(std::move(proj));
    out.coordinates.push_back(std::move(coords));
    offset += d_layer;
  }
  out.combined = OneHotProjection::from_assignment(std::move(combined), d_total,
                                                   ProjectionKind::local_onehot, seed);
  return out;
}

OneHotProjection build_nonuniform_onehot(const ParameterSpaceLayout& layout, std::size_t d,
                                         std::uint64_t seed) {
  if (d < 3) throw std::invalid_argument("non-uniform projection requires d >= 3");
  const auto split = static_cast<std::uint32_t>(2 * d / 3);
  const auto top = static_cast<std::uint32_t>(d);
  const CounterRng rng(seed, Stream::onehot_index);
  std::vector<std::uint32_t> index(layout.total_dim());
  std::size_t a_coords = 0;
  for (std::size_t mi = 0; mi < layout.size(); ++mi) {
    const auto& s = layout.module(mi);
    const auto& o = layout.offsets(mi);
    for (std::size_t i = o.b_offset; i < o.a_offset; ++i)
      index[i] = split + static_cast<std::uint32_t>(rng.below(i, top - split));
    for (std::size_t i = o.a_offset; i < o.a_offset + s.a_size(); ++i)
      index[i] = static_cast<std::uint32_t>(rng.below(i, split));
    a_coords += s.a_size();
  }
  const std::size_t b_coords = layout.total_dim() - a_coords;
  if (a_coords < split || b_coords < top - split)
    throw std::invalid_argument("non-uniform partition has more columns than coordinates");
  repair_empty_columns(index, 0, split);
  repair_empty_columns(index, split, top);
  return OneHotProjection::from_assignment(std::move(index), d, ProjectionKind::nonuniform_onehot,
                                           seed);
}

}  // namespace sublora
