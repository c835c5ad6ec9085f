// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/checkpoint.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <string>

#include "sublora/philox.hpp"
#include "sublora/projection_factory.hpp"

namespace sublora {

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) noexcept {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) noexcept {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

float get_f32(const std::uint8_t* p) noexcept { return std::bit_cast<float>(get_u32(p)); }

}  // namespace le

namespace {

std::runtime_error io_error(const std::string& what, const std::filesystem::path& path) {
  return std::runtime_error(what + " '" + path.string() + "': " + std::strerror(errno));
}

bool known_kind(std::uint8_t k) noexcept {
  return k >= static_cast<std::uint8_t>(ProjectionKind::onehot) &&
         k <= static_cast<std::uint8_t>(ProjectionKind::nonuniform_onehot);
}

}  // namespace

void write_file_synced(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw io_error("cannot create", tmp);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw io_error("cannot write", tmp);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw io_error("cannot sync", tmp);
  }
  if (::close(fd) != 0) throw io_error("cannot close", tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open", path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

template <typename S>
static Checkpoint make_checkpoint_impl(const SubspaceMap& projection,
                                       const ParameterSpaceLayout& layout,
                                       std::span<const S> theta_d) {
  if (projection.kind() == ProjectionKind::custom)
    throw CheckpointError("a custom projection cannot be rebuilt from a seed; refusing to save");
  if (theta_d.size() != projection.subspace_dim())
    throw CheckpointError("theta_d has " + std::to_string(theta_d.size()) +
                          " entries, the projection expects " +
                          std::to_string(projection.subspace_dim()));
  if (projection.full_dim() != layout.total_dim())
    throw CheckpointError("projection and layout disagree on D");
  Checkpoint c;
  c.prng_id = kPhiloxGeneratorId;
  c.seed = projection.seed();
  c.fingerprint = layout.fingerprint();
  c.kind = projection.kind();
  c.theta_d.assign(theta_d.begin(), theta_d.end());
  return c;
}

Checkpoint make_checkpoint(const SubspaceMap& projection, const ParameterSpaceLayout& layout,
                           std::span<const float> theta_d) {
  return make_checkpoint_impl(projection, layout, theta_d);
}

Checkpoint make_checkpoint(const SubspaceMap& projection, const ParameterSpaceLayout& layout,
                           std::span<const double> theta_d) {
  return make_checkpoint_impl(projection, layout, theta_d);
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  if (c.kind == ProjectionKind::custom) throw CheckpointError("custom projections are not serializable");
  std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  out.reserve(kCheckpointHeaderBytes + 4 * c.theta_d.size());
  le::put_u32(out, kCheckpointVersion);
  le::put_u32(out, c.prng_id);
  le::put_u64(out, c.seed);
  le::put_u64(out, c.theta_d.size());
  le::put_u64(out, c.fingerprint);
  out.push_back(static_cast<std::uint8_t>(c.kind));
  for (float v : c.theta_d) le::put_f32(out, v);
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kCheckpointHeaderBytes) throw CheckpointError("truncated checkpoint header");
  if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin()))
    throw CheckpointError("not a checkpoint (bad magic)");
  const std::uint8_t* p = bytes.data();
  if (const auto version = le::get_u32(p + 8); version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.prng_id = le::get_u32(p + 12);
  c.seed = le::get_u64(p + 16);
  const std::uint64_t d = le::get_u64(p + 24);
  c.fingerprint = le::get_u64(p + 32);
  if (!known_kind(p[40])) throw CheckpointError("unknown projection kind " + std::to_string(p[40]));
  c.kind = static_cast<ProjectionKind>(p[40]);
  const std::uint64_t payload = bytes.size() - kCheckpointHeaderBytes;
  if (d > payload / 4 || payload != 4 * d)
    throw CheckpointError("checkpoint payload holds " + std::to_string(payload) +
                          " bytes, header promises d = " + std::to_string(d));
  c.theta_d.resize(d);
  for (std::uint64_t i = 0; i < d; ++i)
    c.theta_d[i] = le::get_f32(p + kCheckpointHeaderBytes + 4 * i);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = encode_checkpoint(checkpoint);
  write_file_synced(path, bytes);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const ParameterSpaceLayout& layout) {
  LoadedCheckpoint out;
  out.checkpoint = read_checkpoint(path);
  const auto& c = out.checkpoint;
  if (c.prng_id != kPhiloxGeneratorId)
    throw CheckpointError("checkpoint was written with generator id " + std::to_string(c.prng_id) +
                          ", this build provides " + std::to_string(kPhiloxGeneratorId));
  if (c.fingerprint != layout.fingerprint())
    throw CheckpointError("layout mismatch: checkpoint fingerprint does not match the model");
  out.projection = build_projection(c.kind, layout, c.theta_d.size(), c.seed);
  if (out.projection->subspace_dim() != c.theta_d.size())
    throw CheckpointError("rebuilt projection has a different d");
  return out;
}

}  // namespace sublora
