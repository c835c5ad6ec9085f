// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "sublora/layout.hpp"
#include "sublora/projection.hpp"

namespace sublora {

/// On-disk layout, all little-endian:
///   0  magic "SLRCKPT\0"   8 bytes
///   8  format version      u32
///   12 generator id        u32
///   16 seed                u64
///   24 d                   u64
///   32 layout fingerprint  u64
///   40 projection kind     u8
///   41 theta_d             d x f32
inline constexpr std::array<char, 8> kCheckpointMagic = {'S', 'L', 'R', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 41;

struct Checkpoint {
  std::uint32_t prng_id = 0;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
  ProjectionKind kind = ProjectionKind::onehot;
  std::vector<float> theta_d;

  bool operator==(const Checkpoint&) const = default;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws CheckpointError for ProjectionKind::custom.
Checkpoint make_checkpoint(const SubspaceMap& projection, const ParameterSpaceLayout& layout,
                           std::span<const float> theta_d);
Checkpoint make_checkpoint(const SubspaceMap& projection, const ParameterSpaceLayout& layout,
                           std::span<const double> theta_d);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
/// Throws CheckpointError on bad magic, unknown version or a size that does
/// not match the header.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes to a temporary sibling, fsyncs, then renames over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

struct LoadedCheckpoint {
  Checkpoint checkpoint;
  std::unique_ptr<SubspaceMap> projection;
};

/// Reads the file, checks the generator id and the layout fingerprint, and
/// rebuilds the projection from (kind, seed, D, d).
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const ParameterSpaceLayout& layout);

/// Little-endian helpers shared by the binary formats.
namespace le {
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);
std::uint32_t get_u32(const std::uint8_t* p) noexcept;
std::uint64_t get_u64(const std::uint8_t* p) noexcept;
float get_f32(const std::uint8_t* p) noexcept;
}  // namespace le

/// Atomic-ish whole-file write with fsync; throws std::runtime_error on I/O failure.
void write_file_synced(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace sublora
