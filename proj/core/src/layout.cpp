// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/layout.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace sublora {

void validate(const ModuleShape& s) {
  if (s.name.empty()) throw std::invalid_argument("module name must not be empty");
  if (s.m == 0 || s.n == 0)
    throw std::invalid_argument("module '" + s.name + "': dimensions must be positive");
  if (s.r == 0 || s.r > std::min(s.m, s.n))
    throw std::invalid_argument("module '" + s.name + "': rank must be in [1, min(m, n)]");
}

ParameterSpaceLayout::ParameterSpaceLayout(std::vector<ModuleShape> modules) {
  for (auto& m : modules) register_module(std::move(m));
}

void ParameterSpaceLayout::register_module(ModuleShape shape) {
  validate(shape);
  if (find(shape.name))
    throw std::invalid_argument("module '" + shape.name + "' already registered");
  ModuleOffsets off;
  off.b_offset = total_dim_;
  off.a_offset = total_dim_ + shape.b_size();
  total_dim_ += shape.size();
  offsets_.push_back(off);
  modules_.push_back(std::move(shape));
}

std::optional<std::size_t> ParameterSpaceLayout::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < modules_.size(); ++i)
    if (modules_[i].name == name) return i;
  return std::nullopt;
}

std::size_t ParameterSpaceLayout::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw std::out_of_range("unknown module '" + std::string(name) + "'");
}

std::size_t ParameterSpaceLayout::locate(std::size_t module, Block block, std::size_t row,
                                         std::size_t col) const {
  if (module >= modules_.size()) throw std::out_of_range("module index out of range");
  const auto& s = modules_[module];
  const auto& o = offsets_[module];
  if (block == Block::B) {
    if (row >= s.m || col >= s.r) throw std::out_of_range("B entry out of range in '" + s.name + "'");
    return o.b_offset + row * s.r + col;
  }
  if (row >= s.r || col >= s.n) throw std::out_of_range("A entry out of range in '" + s.name + "'");
  return o.a_offset + row * s.n + col;
}

Coordinate ParameterSpaceLayout::coordinate(std::size_t g) const {
  if (g >= total_dim_) throw std::out_of_range("coordinate beyond total dimension");
  // Offsets are sorted; find the last module whose B block starts at or before g.
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), g,
                             [](std::size_t v, const ModuleOffsets& o) { return v < o.b_offset; });
  const auto mi = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
  const auto& s = modules_[mi];
  const auto& o = offsets_[mi];
  if (g < o.a_offset) {
    const std::size_t local = g - o.b_offset;
    return {mi, Block::B, local / s.r, local % s.r};
  }
  const std::size_t local = g - o.a_offset;
  return {mi, Block::A, local / s.n, local % s.n};
}

std::uint64_t ParameterSpaceLayout::fingerprint() const noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto mix_byte = [&h](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001B3ull;
  };
  auto mix_u64 = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  for (const auto& s : modules_) {
    mix_u64(s.name.size());
    for (char c : s.name) mix_byte(static_cast<std::uint8_t>(c));
    mix_u64(s.m);
    mix_u64(s.n);
    mix_u64(s.r);
  }
  return h;
}

ParameterSpaceLayout register_module(ParameterSpaceLayout layout, ModuleShape shape) {
  layout.register_module(std::move(shape));
  return layout;
}

std::vector<std::vector<std::size_t>> layer_groups(const ParameterSpaceLayout& layout) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> by_prefix;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& name = layout.module(i).name;
    const auto dot = name.find('.');
    const std::string key = dot == std::string::npos ? name : name.substr(0, dot);
    auto [it, inserted] = by_prefix.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

}  // namespace sublora
