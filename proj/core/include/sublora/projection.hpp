// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sublora {

/// Serialized as a single byte in checkpoints; values are stable.
enum class ProjectionKind : std::uint8_t {
  custom = 0,  // hand-built index map, not reproducible from a seed
  onehot = 1,
  fastfood = 2,
  dense = 3,
  identity = 4,
  vera = 5,
  lora_xs = 6,
  local_onehot = 7,
  nonuniform_onehot = 8,
};

std::string_view to_string(ProjectionKind kind) noexcept;
/// Accepts the CLI spellings: onehot, fastfood, dense, identity, vera,
/// lora-xs, local-onehot, nonuniform-onehot.
ProjectionKind parse_projection_kind(std::string_view text);

/// True for the kinds whose operator is a one-hot index map and can therefore
/// be consumed directly by adapter index tables.
bool is_onehot_family(ProjectionKind kind) noexcept;

/// A frozen map from the trainable subspace R^d to the full adapter space R^D.
/// Most kinds are linear; LoRA-XS is affine (its A blocks are constants), so
/// apply() is theta_D = P theta_d + c and apply_transpose() is P^T.
class SubspaceMap {
 public:
  virtual ~SubspaceMap() = default;

  virtual ProjectionKind kind() const noexcept = 0;
  virtual std::uint64_t seed() const noexcept = 0;
  virtual std::size_t full_dim() const noexcept = 0;
  virtual std::size_t subspace_dim() const noexcept = 0;

  virtual void apply(std::span<const float> theta_d, std::span<float> theta_D) const = 0;
  virtual void apply(std::span<const double> theta_d, std::span<double> theta_D) const = 0;
  virtual void apply_transpose(std::span<const float> g_D, std::span<float> g_d) const = 0;
  virtual void apply_transpose(std::span<const double> g_D, std::span<double> g_d) const = 0;

  /// Worker threads used by apply(). Results do not depend on this value.
  unsigned threads() const noexcept { return threads_; }
  void set_threads(unsigned threads) noexcept { threads_ = threads == 0 ? 1 : threads; }

  template <typename S>
  std::vector<S> project(std::span<const S> theta_d) const {
    std::vector<S> out(full_dim());
    apply(theta_d, std::span<S>(out));
    return out;
  }

  template <typename S>
  std::vector<S> project_transpose(std::span<const S> g_D) const {
    std::vector<S> out(subspace_dim());
    apply_transpose(g_D, std::span<S>(out));
    return out;
  }

 protected:
  void check_apply_sizes(std::size_t in, std::size_t out) const;
  void check_transpose_sizes(std::size_t in, std::size_t out) const;

 private:
  unsigned threads_ = 1;
};

namespace detail {

/// Runs fn(begin, end) over [0, n) split into `threads` contiguous chunks.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn);

}  // namespace detail
}  // namespace sublora

#include "sublora/detail/parallel.hpp"
