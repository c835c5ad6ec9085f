// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sublora/projection.hpp"

namespace sublora {

struct TimingStats {
  std::size_t repetitions = 0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

/// Linear-interpolated percentiles of the samples (seconds).
TimingStats summarize_times(std::vector<double> samples);

/// Runs fn `warmups` times untimed, then `repetitions` timed times.
TimingStats time_repeated(const std::function<void()>& fn, std::size_t warmups,
                          std::size_t repetitions);

struct BenchOptions {
  std::size_t warmups = 3;
  std::size_t repetitions = 9;  // at least 5
  unsigned threads = 1;
  std::uint64_t seed = 0;
};

struct BenchRecord {
  ProjectionKind kind = ProjectionKind::onehot;
  std::size_t D = 0;
  std::size_t d = 0;
  unsigned threads = 1;
  TimingStats time;             // per apply, seconds
  double throughput = 0.0;      // output coordinates per second at the median
  std::size_t peak_aux_bytes = 0;  // heap high-water mark during timed applies
  double construction_seconds = 0.0;
};

/// Times float apply() of a freshly built one-hot, fastfood or dense map on a
/// random theta_d. Construction is timed separately and excluded.
BenchRecord bench_apply(ProjectionKind kind, std::size_t D, std::size_t d,
                        const BenchOptions& options);

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);

/// Median apply time against log2(d), one polyline per (kind, D).
void write_bench_svg(const std::filesystem::path& path, std::span<const BenchRecord> records);

}  // namespace sublora
