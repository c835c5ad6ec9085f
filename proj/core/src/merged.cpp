// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/merged.hpp"

#include <stdexcept>

#include "sublora/checkpoint.hpp"

namespace sublora {

std::vector<MergedSection> merge_all(const ParameterSpaceLayout& layout,
                                     const SubspaceMap& projection,
                                     std::span<const float> theta_d,
                                     const BaseWeightLookup& base_weight, double scaling) {
  if (projection.full_dim() != layout.total_dim())
    throw std::invalid_argument("projection and layout disagree on D");
  const std::vector<double> wide(theta_d.begin(), theta_d.end());
  const auto theta_D = projection.project<double>(wide);
  std::vector<MergedSection> sections;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto& s = layout.module(k);
    const auto off = layout.offsets(k);
    if (!base_weight) throw std::invalid_argument("no base weights supplied");
    const Matrix<double> w = base_weight(s.name);
    if (w.rows() != static_cast<Eigen::Index>(s.m) || w.cols() != static_cast<Eigen::Index>(s.n))
      throw std::invalid_argument("base weight for '" + s.name + "' has the wrong shape");
    const auto m = static_cast<Eigen::Index>(s.m);
    const auto n = static_cast<Eigen::Index>(s.n);
    const auto r = static_cast<Eigen::Index>(s.r);
    Eigen::Map<const Matrix<double>> b(theta_D.data() + off.b_offset, m, r);
    Eigen::Map<const Matrix<double>> a(theta_D.data() + off.a_offset, r, n);
    const Matrix<double> merged = w + scaling * (b * a);
    MergedSection sec;
    sec.name = s.name;
    sec.m = static_cast<std::uint32_t>(s.m);
    sec.n = static_cast<std::uint32_t>(s.n);
    sec.values.resize(s.m * s.n);
    for (Eigen::Index i = 0; i < merged.size(); ++i)
      sec.values[static_cast<std::size_t>(i)] = static_cast<float>(merged.data()[i]);
    sections.push_back(std::move(sec));
  }
  return sections;
}

std::vector<std::uint8_t> encode_merged(std::span<const MergedSection> sections) {
  std::vector<std::uint8_t> out(kMergedMagic.begin(), kMergedMagic.end());
  le::put_u32(out, kMergedVersion);
  le::put_u32(out, static_cast<std::uint32_t>(sections.size()));
  for (const auto& s : sections) {
    if (s.values.size() != static_cast<std::size_t>(s.m) * s.n)
      throw std::invalid_argument("section '" + s.name + "' has the wrong value count");
    le::put_u32(out, static_cast<std::uint32_t>(s.name.size()));
    out.insert(out.end(), s.name.begin(), s.name.end());
    le::put_u32(out, s.m);
    le::put_u32(out, s.n);
    for (float v : s.values) le::put_f32(out, v);
  }
  return out;
}

std::vector<MergedSection> decode_merged(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) throw std::runtime_error("truncated merged-weights file");
  };
  need(16);
  if (!std::equal(kMergedMagic.begin(), kMergedMagic.end(), bytes.begin()))
    throw std::runtime_error("not a merged-weights file (bad magic)");
  if (le::get_u32(bytes.data() + 8) != kMergedVersion)
    throw std::runtime_error("unsupported merged-weights version");
  const std::uint32_t count = le::get_u32(bytes.data() + 12);
  pos = 16;
  std::vector<MergedSection> sections;
  for (std::uint32_t k = 0; k < count; ++k) {
    MergedSection s;
    need(4);
    const std::uint32_t len = le::get_u32(bytes.data() + pos);
    pos += 4;
    need(len);
    s.name.assign(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    need(8);
    s.m = le::get_u32(bytes.data() + pos);
    s.n = le::get_u32(bytes.data() + pos + 4);
    pos += 8;
    const std::size_t values = static_cast<std::size_t>(s.m) * s.n;
    if (values > (bytes.size() - pos) / 4) throw std::runtime_error("truncated merged-weights file");
    s.values.resize(values);
    for (std::size_t i = 0; i < values; ++i) s.values[i] = le::get_f32(bytes.data() + pos + 4 * i);
    pos += 4 * values;
    sections.push_back(std::move(s));
  }
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes after the last section");
  return sections;
}

void export_merged(const std::filesystem::path& path, const ParameterSpaceLayout& layout,
                   const SubspaceMap& projection, std::span<const float> theta_d,
                   const BaseWeightLookup& base_weight, double scaling) {
  const auto sections = merge_all(layout, projection, theta_d, base_weight, scaling);
  write_file_synced(path, encode_merged(sections));
}

std::vector<MergedSection> read_merged(const std::filesystem::path& path) {
  return decode_merged(read_file(path));
}

}  // namespace sublora
