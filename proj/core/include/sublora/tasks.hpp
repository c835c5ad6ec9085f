// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sublora/tensor.hpp"

namespace sublora {

enum class TaskKind { teacher_student, classification, char_lm };

std::string_view to_string(TaskKind kind) noexcept;
TaskKind parse_task_kind(std::string_view text);

/// A batch or split of examples. Which fields are populated depends on the
/// task: x/y for regression, x/labels for classification, inputs/targets
/// (token windows) for the character LM.
struct TaskData {
  TaskKind kind = TaskKind::teacher_student;
  Matrix<double> x;
  Matrix<double> y;
  std::vector<int> labels;
  std::vector<std::vector<int>> inputs;
  std::vector<std::vector<int>> targets;

  std::size_t size() const noexcept;
  TaskData subset(std::span<const std::size_t> rows) const;
};

struct TaskSplits {
  TaskData train;
  TaskData eval;
};

/// Inputs x ~ N(0, I); targets are filled in later by a teacher model.
TaskSplits make_regression_inputs(std::size_t input_dim, std::size_t n_train, std::size_t n_eval,
                                  std::uint64_t seed);

/// Two balanced Gaussian classes: labels alternate 0/1, class means are
/// +/- separation * u for a random unit direction u, unit noise.
TaskSplits make_classification(std::size_t input_dim, std::size_t n_train, std::size_t n_eval,
                               double separation, std::uint64_t seed);

/// Byte-level windows of length seq_len (inputs) and the next bytes
/// (targets). Training windows start in the first 90% of `text`, eval
/// windows in the remainder; bytes above 127 are folded to '?'.
TaskSplits make_char_lm(std::string_view text, std::size_t seq_len, std::size_t n_train,
                        std::size_t n_eval, std::uint64_t seed);

/// A few kilobytes of built-in English prose for the character LM.
std::string_view builtin_corpus() noexcept;

}  // namespace sublora
