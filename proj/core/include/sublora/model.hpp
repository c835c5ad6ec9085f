// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "sublora/layout.hpp"
#include "sublora/onehot.hpp"
#include "sublora/tasks.hpp"
#include "sublora/tensor.hpp"
#include "sublora/verification.hpp"

namespace sublora {

enum class Architecture { mlp, toy_transformer };

std::string_view to_string(Architecture arch) noexcept;
Architecture parse_architecture(std::string_view text);

struct TinyModelConfig {
  Architecture architecture = Architecture::mlp;
  TaskKind task = TaskKind::teacher_student;
  std::size_t depth = 2;       // hidden layers (mlp) or blocks (transformer)
  std::size_t width = 32;
  std::size_t heads = 1;       // transformer only
  std::size_t input_dim = 16;  // mlp features
  std::size_t output_dim = 4;  // regression outputs or number of classes
  std::size_t rank = 4;
  std::size_t vocab = 128;     // char-lm, byte level
  std::size_t seq_len = 32;
  /// mlp: "all" or a comma list of module names (layerN.fc).
  /// transformer: "qv", "all", or a comma list of suffixes from q,k,v,o,fc1,fc2.
  std::string adapted = "default";
  double scaling = 1.0;
  Precision precision = Precision::f32;
};

/// Throws std::invalid_argument on inconsistent settings.
void validate(const TinyModelConfig& config);

/// The adapted modules of the architecture, in forward order.
ParameterSpaceLayout model_layout(const TinyModelConfig& config);

/// A small network with frozen random base weights whose adapted linears
/// read their factors from a source vector (theta_d for one-hot bindings,
/// theta_D otherwise). Gradients are hand-derived reverse mode.
template <typename S>
class TinyModel {
 public:
  virtual ~TinyModel() = default;

  const TinyModelConfig& config() const noexcept { return config_; }
  const ParameterSpaceLayout& layout() const noexcept { return layout_; }

  /// Rebuilds adapter tables: from `projection` when given, else identity
  /// tables over theta_D.
  virtual void bind(const OneHotProjection* projection) = 0;
  std::size_t source_dim() const noexcept { return source_dim_; }

  /// Mean task loss. When grad_src is non-empty it is overwritten with
  /// d loss / d src; grad_head likewise for the trainable head, if any.
  virtual S loss(const TaskData& batch, std::span<const S> src, std::span<S> grad_src,
                 std::span<S> grad_head) = 0;

  /// Regression outputs, class logits, or per-token logits ((B*T) x vocab).
  virtual Matrix<S> outputs(const TaskData& batch, std::span<const S> src) = 0;

  /// Trainable classifier head (empty for tasks without one).
  std::span<S> head() noexcept { return head_; }
  std::span<const S> head() const noexcept { return head_; }

  /// FNV-1a over every frozen parameter.
  virtual std::uint64_t base_checksum() const = 0;
  /// Frozen m x n weight of an adapted module.
  virtual Matrix<double> base_weight(std::string_view module) const = 0;
  virtual Vector<double> base_bias(std::string_view module) const = 0;

 protected:
  TinyModelConfig config_;
  ParameterSpaceLayout layout_;
  std::size_t source_dim_ = 0;
  std::vector<S> head_;
};

/// Base weights are drawn in double from Philox(seed) and then rounded, so
/// f32 and f64 models built from the same seed describe the same network.
template <typename S>
std::unique_ptr<TinyModel<S>> make_model(const TinyModelConfig& config, std::uint64_t seed);

}  // namespace sublora
