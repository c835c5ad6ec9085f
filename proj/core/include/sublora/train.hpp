// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sublora/model.hpp"
#include "sublora/optimizer.hpp"
#include "sublora/projection.hpp"
#include "sublora/tasks.hpp"

namespace sublora {

/// How teacher-student targets are produced. The teacher is the frozen base
/// network plus a planted adapter theta_D*, constant on groups of
/// coordinates so that it lies in a d*-dimensional one-hot subspace.
///   nested:   groups are the student's own columns folded mod d*, so the
///             plant is reachable by a one-hot student (needs d >= d*).
///   subspace: groups come from an independent one-hot draw with d* columns.
///   full:     no grouping, every coordinate is drawn independently.
enum class PlantMode { nested, subspace, full };

std::string_view to_string(PlantMode mode) noexcept;
PlantMode parse_plant_mode(std::string_view text);

struct RunConfig {
  TinyModelConfig model;
  AdamWConfig optimizer;
  double head_lr = 1e-2;
  std::size_t steps = 500;
  std::size_t batch_size = 0;  // 0 = full batch
  double init_range = 0.02;    // theta_d ~ U(-init_range, init_range)
  ProjectionKind projection = ProjectionKind::onehot;
  std::size_t d = 256;         // ignored by kinds with a natural dimension
  std::uint64_t seed = 0;
  std::size_t n_train = 256;
  std::size_t n_eval = 256;
  PlantMode plant = PlantMode::nested;
  std::size_t d_star = 64;
  double planted_scale = 0.3;  // RMS of theta_D*
  double separation = 1.5;     // classification class offset
  std::string corpus;          // char-lm text; empty selects the built-in corpus
  unsigned threads = 1;
};

/// Seeds of the independent random ingredients of a run. Everything derives
/// from RunConfig::seed, so two runs that differ only in the projection kind
/// see the same base model, data and teacher.
struct RunSeeds {
  std::uint64_t model;
  std::uint64_t data;
  std::uint64_t projection;
  std::uint64_t plant;
  std::uint64_t init;
  std::uint64_t minibatch;
};
RunSeeds run_seeds(std::uint64_t seed) noexcept;

/// Data for the configured task. For teacher-student runs the targets come
/// from the planted teacher; `projection` is only consulted for the nested
/// plant and must then be a one-hot map over the model layout.
TaskSplits prepare_task(const RunConfig& config, const SubspaceMap* projection = nullptr);

/// The planted theta_D* (empty for tasks without a teacher).
std::vector<double> planted_theta(const RunConfig& config, const SubspaceMap* projection);

/// Initial theta_d, drawn in double.
std::vector<double> initial_theta(const RunConfig& config, std::size_t d);

struct RunMetrics {
  std::string metric;  // mse, accuracy or perplexity
  std::vector<double> loss_curve;  // training loss before each update
  double initial_eval = 0.0;
  double final_eval = 0.0;
  double optimum_eval = 0.0;  // teacher's own eval metric; 0 without a teacher
  double wall_seconds = 0.0;
  std::size_t peak_bytes = 0;
  std::uint64_t base_checksum_before = 0;
  std::uint64_t base_checksum_after = 0;
  std::size_t trainable_count = 0;  // = d
  std::size_t head_count = 0;
  std::size_t full_dim = 0;
  std::vector<double> theta_d;  // final values, widened from the training precision
  std::vector<double> head;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, double loss);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Builds the model and task from the config and optimizes theta_d (and the
/// classifier head, if any) through `projection`. One-hot maps feed the
/// adapter tables directly; every other kind goes through apply and
/// apply_transpose over theta_D. Throws DivergenceError on a non-finite loss.
RunMetrics train(const RunConfig& config, const SubspaceMap& projection);

/// Builds the configured projection (seeded by run_seeds(seed).projection)
/// and trains through it.
RunMetrics train(const RunConfig& config);

std::unique_ptr<SubspaceMap> make_run_projection(const RunConfig& config);

/// mse (regression), accuracy (classification) or perplexity (char-lm) of
/// the model with adapter source `src`. Throws on an empty split.
template <typename S>
double evaluate(TinyModel<S>& model, const TaskData& split, std::span<const S> src);

std::string_view metric_name(TaskKind task) noexcept;

}  // namespace sublora
