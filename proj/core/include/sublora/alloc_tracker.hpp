// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace sublora::alloc {

/// Live heap bytes, process-wide. Linking any of these functions installs a
/// counting malloc/free in front of glibc's; elsewhere every count is 0.
std::size_t current_bytes() noexcept;
/// High-water mark of current_bytes() since the last reset_peak().
std::size_t peak_bytes() noexcept;
/// Sets the high-water mark to the current live byte count.
void reset_peak() noexcept;

/// Scoped measurement: peak() is the extra live memory above the level at
/// construction.
class PeakScope {
 public:
  PeakScope() noexcept : base_(current_bytes()) { reset_peak(); }
  std::size_t peak() const noexcept {
    const std::size_t p = peak_bytes();
    return p > base_ ? p - base_ : 0;
  }

 private:
  std::size_t base_;
};

}  // namespace sublora::alloc
