// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/philox.hpp"

#include <cmath>
#include <numbers>

namespace sublora {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint32_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

PhiloxCounter CounterRng::block(std::uint64_t position, std::uint32_t lane) const noexcept {
  return philox4x32_10({static_cast<std::uint32_t>(position),
                        static_cast<std::uint32_t>(position >> 32), stream_, lane},
                       key_);
}

std::uint64_t CounterRng::bits64(std::uint64_t position, std::uint32_t lane) const noexcept {
  const auto b = block(position, lane);
  return (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
}

double CounterRng::uniform(std::uint64_t position) const noexcept {
  return static_cast<double>(bits64(position) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t position) const noexcept {
  const auto b = block(position);
  const std::uint64_t w0 = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
  const std::uint64_t w1 = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
  // u1 in (0, 1] keeps the log finite.
  const double u1 = static_cast<double>((w0 >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t CounterRng::below(std::uint64_t position, std::uint64_t bound) const noexcept {
  std::uint32_t lane = 0;
  std::uint64_t x = bits64(position, lane);
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = bits64(position, ++lane);
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace sublora
