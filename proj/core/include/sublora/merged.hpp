// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sublora/layout.hpp"
#include "sublora/projection.hpp"
#include "sublora/tensor.hpp"

namespace sublora {

/// Container layout, little-endian: magic "SLRMERG\0", version u32, section
/// count u32, then per module: name length u32, name bytes, m u32, n u32 and
/// m*n row-major f32 values of W + scaling * B A.
inline constexpr std::array<char, 8> kMergedMagic = {'S', 'L', 'R', 'M', 'E', 'R', 'G', '\0'};
inline constexpr std::uint32_t kMergedVersion = 1;

struct MergedSection {
  std::string name;
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::vector<float> values;

  bool operator==(const MergedSection&) const = default;
};

using BaseWeightLookup = std::function<Matrix<double>(std::string_view module)>;

/// theta_D = P theta_d, then one merged m x n matrix per module, computed in
/// double and rounded once. Throws if a base weight is missing or misshaped.
std::vector<MergedSection> merge_all(const ParameterSpaceLayout& layout,
                                     const SubspaceMap& projection,
                                     std::span<const float> theta_d,
                                     const BaseWeightLookup& base_weight, double scaling = 1.0);

std::vector<std::uint8_t> encode_merged(std::span<const MergedSection> sections);
std::vector<MergedSection> decode_merged(std::span<const std::uint8_t> bytes);

void export_merged(const std::filesystem::path& path, const ParameterSpaceLayout& layout,
                   const SubspaceMap& projection, std::span<const float> theta_d,
                   const BaseWeightLookup& base_weight, double scaling = 1.0);
std::vector<MergedSection> read_merged(const std::filesystem::path& path);

}  // namespace sublora
