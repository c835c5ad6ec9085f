// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sublora {

enum class Block : std::uint8_t { B, A };

/// One adapted linear module: W is m x n, B is m x r, A is r x n.
struct ModuleShape {
  std::string name;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t r = 0;

  std::size_t b_size() const noexcept { return m * r; }
  std::size_t a_size() const noexcept { return r * n; }
  std::size_t size() const noexcept { return (m + n) * r; }

  friend bool operator==(const ModuleShape&, const ModuleShape&) = default;
};

/// Throws std::invalid_argument unless m, n >= 1 and 1 <= r <= min(m, n).
void validate(const ModuleShape& shape);

struct ModuleOffsets {
  std::size_t b_offset = 0;
  std::size_t a_offset = 0;
};

struct Coordinate {
  std::size_t module = 0;
  Block block = Block::B;
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

/// Coordinate system of the full adapter space: every module contributes
/// vec_row(B) followed by vec_row(A), modules concatenated in registration
/// order. Bias terms are never part of the space.
class ParameterSpaceLayout {
 public:
  ParameterSpaceLayout() = default;
  explicit ParameterSpaceLayout(std::vector<ModuleShape> modules);

  /// Appends a module. Throws on duplicate name or invalid shape.
  void register_module(ModuleShape shape);

  std::size_t total_dim() const noexcept { return total_dim_; }
  std::size_t size() const noexcept { return modules_.size(); }
  bool empty() const noexcept { return modules_.empty(); }

  std::span<const ModuleShape> modules() const noexcept { return modules_; }
  const ModuleShape& module(std::size_t index) const { return modules_.at(index); }
  const ModuleOffsets& offsets(std::size_t index) const { return offsets_.at(index); }

  std::optional<std::size_t> find(std::string_view name) const noexcept;
  /// Like find() but throws std::out_of_range for unknown names.
  std::size_t index_of(std::string_view name) const;

  std::size_t locate(std::size_t module, Block block, std::size_t row, std::size_t col) const;
  std::size_t locate(std::string_view module, Block block, std::size_t row,
                     std::size_t col) const {
    return locate(index_of(module), block, row, col);
  }

  /// Inverse of locate().
  Coordinate coordinate(std::size_t global_index) const;

  /// 64-bit FNV-1a over (name, m, n, r) in order. Stable across platforms.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const ParameterSpaceLayout& a, const ParameterSpaceLayout& b) {
    return a.modules_ == b.modules_;
  }

 private:
  std::vector<ModuleShape> modules_;
  std::vector<ModuleOffsets> offsets_;
  std::size_t total_dim_ = 0;
};

/// Functional form: returns a copy of `layout` extended by `shape`.
ParameterSpaceLayout register_module(ParameterSpaceLayout layout, ModuleShape shape);

/// Layers for the per-layer (local) ablation: modules are grouped by the part
/// of their name before the first '.', in first-appearance order. A module
/// without a '.' is its own layer.
std::vector<std::vector<std::size_t>> layer_groups(const ParameterSpaceLayout& layout);

}  // namespace sublora
