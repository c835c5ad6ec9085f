// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sublora {

enum class Schedule { constant, linear, cosine };

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  double warmup_ratio = 0.06;
  Schedule schedule = Schedule::linear;
  /// Horizon of the schedule. 0 disables warmup and decay.
  std::size_t total_steps = 0;
};

struct OptimizerState {
  AdamWConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::size_t step = 0;
};

OptimizerState make_optimizer(const AdamWConfig& config, std::size_t dim);

/// Learning rate used for the update with 0-based index `step`: linear
/// warmup over ceil(warmup_ratio * total_steps) steps, then linear or cosine
/// decay to 0 at total_steps.
double scheduled_lr(const AdamWConfig& config, std::size_t step);

/// One AdamW update with bias correction and decoupled weight decay:
///   theta <- theta * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps).
/// Moments are kept in double for either parameter precision.
template <typename S>
void adamw_step(OptimizerState& state, std::span<const S> grad, std::span<S> theta);

}  // namespace sublora
