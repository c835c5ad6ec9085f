// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sublora {

OptimizerState make_optimizer(const AdamWConfig& config, std::size_t dim) {
  OptimizerState s;
  s.config = config;
  s.first_moment.assign(dim, 0.0);
  s.second_moment.assign(dim, 0.0);
  return s;
}

double scheduled_lr(const AdamWConfig& c, std::size_t step) {
  if (c.total_steps == 0 || c.schedule == Schedule::constant) return c.lr;
  const auto total = static_cast<double>(c.total_steps);
  const double warmup = std::ceil(c.warmup_ratio * total);
  const auto s = static_cast<double>(step);
  if (s < warmup) return c.lr * (s + 1.0) / warmup;
  if (s >= total) return 0.0;
  const double progress = (s - warmup) / std::max(1.0, total - warmup);
  if (c.schedule == Schedule::linear) return c.lr * (1.0 - progress);
  return c.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename S>
void adamw_step(OptimizerState& state, std::span<const S> grad, std::span<S> theta) {
  const std::size_t n = theta.size();
  if (grad.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
    throw std::invalid_argument("optimizer state, gradient and parameters differ in length");
  const auto& c = state.config;
  const double lr = scheduled_lr(c, state.step);
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - lr * c.weight_decay;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double update = (m / bc1) / (std::sqrt(v / bc2) + c.eps);
    theta[i] = static_cast<S>(static_cast<double>(theta[i]) * decay - lr * update);
  }
}

template void adamw_step<float>(OptimizerState&, std::span<const float>, std::span<float>);
template void adamw_step<double>(OptimizerState&, std::span<const double>, std::span<double>);

}  // namespace sublora
