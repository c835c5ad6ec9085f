// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace sublora {

/// Identifier written into checkpoints. Any change to the round function,
/// the counter layout below, or the derived samplers must bump it: the
/// projection is rebuilt from (generator id, seed) alone.
inline constexpr std::uint32_t kPhiloxGeneratorId = 1;

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Independent draw families. Values are part of the on-disk contract.
enum class Stream : std::uint32_t {
  onehot_index = 1,
  theta_init = 2,
  fastfood_signs = 3,
  fastfood_perm = 4,
  fastfood_gauss = 5,
  dense_gauss = 6,
  vera_factors = 7,
  loraxs_factors = 8,
  isometry_samples = 9,
  model_weights = 10,
  task_data = 11,
  planted = 12,
  minibatch = 13,
};

/// SplitMix64 finalizer; used to derive child seeds (per layer, per block).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Position-keyed view of Philox. The counter is
/// (position lo, position hi, stream, lane) and the key is the 64-bit seed,
/// so the value at a position never depends on how many other positions
/// were drawn or in which order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream) noexcept
      : CounterRng(seed, static_cast<std::uint32_t>(stream)) {}
  CounterRng(std::uint64_t seed, std::uint32_t stream) noexcept;

  PhiloxCounter block(std::uint64_t position, std::uint32_t lane = 0) const noexcept;
  std::uint64_t bits64(std::uint64_t position, std::uint32_t lane = 0) const noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t position) const noexcept;

  /// Standard normal via Box-Muller on one Philox block.
  double normal(std::uint64_t position) const noexcept;

  /// Exactly uniform integer in [0, bound) (Lemire's multiply-shift with
  /// rejection; rejected draws move to the next lane). bound must be > 0.
  std::uint64_t below(std::uint64_t position, std::uint64_t bound) const noexcept;

 private:
  PhiloxKey key_;
  std::uint32_t stream_;
};

/// Sequential cursor over a CounterRng, for code that just wants "the next
/// number" (data generation, weight init).
class RngStream {
 public:
  RngStream(std::uint64_t seed, Stream stream) noexcept : rng_(seed, stream) {}

  std::uint64_t next_u64() noexcept { return rng_.bits64(pos_++); }
  double uniform() noexcept { return rng_.uniform(pos_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return rng_.normal(pos_++); }
  std::uint64_t below(std::uint64_t bound) noexcept { return rng_.below(pos_++, bound); }

 private:
  CounterRng rng_;
  std::uint64_t pos_ = 0;
};

}  // namespace sublora
