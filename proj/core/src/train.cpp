// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sublora/alloc_tracker.hpp"
#include "sublora/onehot.hpp"
#include "sublora/philox.hpp"
#include "sublora/projection_factory.hpp"

namespace sublora {

std::string_view to_string(PlantMode mode) noexcept {
  switch (mode) {
    case PlantMode::nested:
      return "nested";
    case PlantMode::subspace:
      return "subspace";
    case PlantMode::full:
      return "full";
  }
  return "?";
}

PlantMode parse_plant_mode(std::string_view text) {
  if (text == "nested") return PlantMode::nested;
  if (text == "subspace") return PlantMode::subspace;
  if (text == "full") return PlantMode::full;
  throw std::invalid_argument("unknown plant mode '" + std::string(text) + "'");
}

RunSeeds run_seeds(std::uint64_t seed) noexcept {
  return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3),
          derive_seed(seed, 4), derive_seed(seed, 5), derive_seed(seed, 6)};
}

std::string_view metric_name(TaskKind task) noexcept {
  switch (task) {
    case TaskKind::teacher_student:
      return "mse";
    case TaskKind::classification:
      return "accuracy";
    case TaskKind::char_lm:
      return "perplexity";
  }
  return "?";
}

DivergenceError::DivergenceError(std::size_t step, double loss)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "training diverged at step " << step << " (loss " << loss << ")";
        return os.str();
      }()),
      step_(step) {}

std::vector<double> planted_theta(const RunConfig& config, const SubspaceMap* projection) {
  if (config.model.task != TaskKind::teacher_student) return {};
  const auto layout = model_layout(config.model);
  const std::size_t D = layout.total_dim();
  const auto seeds = run_seeds(config.seed);
  std::vector<double> theta(D);
  if (config.plant == PlantMode::full) {
    RngStream rng(seeds.plant, Stream::planted);
    for (auto& t : theta) t = config.planted_scale * rng.normal();
    return theta;
  }
  if (config.d_star == 0) throw std::invalid_argument("d_star must be positive");
  std::vector<std::uint32_t> group(D);
  if (config.plant == PlantMode::nested) {
    const auto* onehot = dynamic_cast<const OneHotProjection*>(projection);
    if (!onehot || onehot->full_dim() != D)
      throw std::invalid_argument("the nested plant needs the run's one-hot projection");
    if (onehot->subspace_dim() < config.d_star)
      throw std::invalid_argument("the nested plant needs d >= d_star");
    for (std::size_t i = 0; i < D; ++i)
      group[i] = static_cast<std::uint32_t>(onehot->index()[i] % config.d_star);
  } else {
    const auto draw = OneHotProjection::build(D, config.d_star, derive_seed(seeds.plant, 1));
    std::copy(draw.index().begin(), draw.index().end(), group.begin());
  }
  RngStream rng(seeds.plant, Stream::planted);
  std::vector<double> value(config.d_star);
  for (auto& v : value) v = config.planted_scale * rng.normal();
  for (std::size_t i = 0; i < D; ++i) theta[i] = value[group[i]];
  return theta;
}

TaskSplits prepare_task(const RunConfig& config, const SubspaceMap* projection) {
  const auto& mc = config.model;
  validate(mc);
  const auto seeds = run_seeds(config.seed);
  switch (mc.task) {
    case TaskKind::classification:
      return make_classification(mc.input_dim, config.n_train, config.n_eval, config.separation,
                                 seeds.data);
    case TaskKind::char_lm: {
      const std::string_view text = config.corpus.empty() ? builtin_corpus()
                                                          : std::string_view(config.corpus);
      return make_char_lm(text, mc.seq_len, config.n_train, config.n_eval, seeds.data);
    }
    case TaskKind::teacher_student:
      break;
  }
  auto splits = make_regression_inputs(mc.input_dim, config.n_train, config.n_eval, seeds.data);
  auto teacher = make_model<double>(mc, seeds.model);
  teacher->bind(nullptr);
  const auto theta = planted_theta(config, projection);
  splits.train.y = teacher->outputs(splits.train, theta);
  splits.eval.y = teacher->outputs(splits.eval, theta);
  return splits;
}

std::vector<double> initial_theta(const RunConfig& config, std::size_t d) {
  RngStream rng(run_seeds(config.seed).init, Stream::theta_init);
  std::vector<double> theta(d);
  for (auto& t : theta) t = rng.uniform(-config.init_range, config.init_range);
  return theta;
}

template <typename S>
double evaluate(TinyModel<S>& model, const TaskData& split, std::span<const S> src) {
  if (split.size() == 0) throw std::invalid_argument("cannot evaluate an empty split");
  switch (split.kind) {
    case TaskKind::teacher_student:
      return static_cast<double>(model.loss(split, src, {}, {}));
    case TaskKind::char_lm:
      return std::exp(static_cast<double>(model.loss(split, src, {}, {})));
    case TaskKind::classification:
      break;
  }
  const Matrix<S> logits = model.outputs(split, src);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) == split.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

template double evaluate<float>(TinyModel<float>&, const TaskData&, std::span<const float>);
template double evaluate<double>(TinyModel<double>&, const TaskData&, std::span<const double>);

namespace {

template <typename S>
std::vector<S> narrow(const std::vector<double>& v) {
  return std::vector<S>(v.begin(), v.end());
}

template <typename S>
RunMetrics train_impl(const RunConfig& config, const SubspaceMap& projection) {
  const auto start = std::chrono::steady_clock::now();
  alloc::PeakScope peak;
  const auto seeds = run_seeds(config.seed);

  auto model = make_model<S>(config.model, seeds.model);
  const auto& layout = model->layout();
  if (projection.full_dim() != layout.total_dim())
    throw std::invalid_argument("projection covers " + std::to_string(projection.full_dim()) +
                                " coordinates but the model layout has " +
                                std::to_string(layout.total_dim()));
  const auto* onehot = dynamic_cast<const OneHotProjection*>(&projection);
  model->bind(onehot);

  const TaskSplits data = prepare_task(config, &projection);
  const std::size_t d = projection.subspace_dim();
  const std::size_t D = projection.full_dim();

  RunMetrics metrics;
  metrics.metric = std::string(metric_name(config.model.task));
  metrics.trainable_count = d;
  metrics.full_dim = D;
  metrics.head_count = model->head().size();
  metrics.base_checksum_before = model->base_checksum();

  std::vector<S> theta_d = narrow<S>(initial_theta(config, d));
  std::vector<S> grad_d(d);
  std::vector<S> theta_D(onehot ? 0 : D);
  std::vector<S> grad_D(onehot ? 0 : D);
  std::vector<S> grad_head(model->head().size());

  AdamWConfig opt_config = config.optimizer;
  if (opt_config.total_steps == 0) opt_config.total_steps = config.steps;
  OptimizerState opt = make_optimizer(opt_config, d);
  AdamWConfig head_config = opt_config;
  head_config.lr = config.head_lr;
  OptimizerState head_opt = make_optimizer(head_config, grad_head.size());

  auto source = [&]() -> std::span<const S> {
    if (onehot) return theta_d;
    projection.apply(std::span<const S>(theta_d), std::span<S>(theta_D));
    return theta_D;
  };

  // The teacher's own rounding of the planted adapter sets the attainable floor.
  if (config.model.task == TaskKind::teacher_student) {
    auto reference = make_model<S>(config.model, seeds.model);
    reference->bind(nullptr);
    const auto planted = narrow<S>(planted_theta(config, &projection));
    metrics.optimum_eval = evaluate<S>(*reference, data.eval, planted);
  }
  metrics.initial_eval = evaluate<S>(*model, data.eval, source());

  const std::size_t n = data.train.size();
  const bool minibatch = config.batch_size > 0 && config.batch_size < n;
  RngStream batch_rng(seeds.minibatch, Stream::minibatch);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  metrics.loss_curve.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    TaskData batch_storage;
    const TaskData* batch = &data.train;
    if (minibatch) {
      for (std::size_t i = 0; i < config.batch_size; ++i)
        std::swap(order[i], order[i + batch_rng.below(n - i)]);
      batch_storage = data.train.subset(std::span<const std::size_t>(order.data(), config.batch_size));
      batch = &batch_storage;
    }
    const auto src = source();
    S loss;
    try {
      loss = model->loss(*batch, src, onehot ? std::span<S>(grad_d) : std::span<S>(grad_D), grad_head);
    } catch (const std::domain_error&) {
      throw DivergenceError(step, std::numeric_limits<double>::quiet_NaN());
    }
    if (!std::isfinite(static_cast<double>(loss))) throw DivergenceError(step, loss);
    metrics.loss_curve.push_back(static_cast<double>(loss));
    if (!onehot) projection.apply_transpose(std::span<const S>(grad_D), std::span<S>(grad_d));
    adamw_step<S>(opt, grad_d, theta_d);
    if (!grad_head.empty()) adamw_step<S>(head_opt, grad_head, model->head());
  }

  metrics.final_eval = evaluate<S>(*model, data.eval, source());
  if (!std::isfinite(metrics.final_eval)) throw DivergenceError(config.steps, metrics.final_eval);
  metrics.base_checksum_after = model->base_checksum();
  metrics.theta_d.assign(theta_d.begin(), theta_d.end());
  metrics.head.assign(model->head().begin(), model->head().end());
  metrics.peak_bytes = peak.peak();
  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

}  // namespace

std::unique_ptr<SubspaceMap> make_run_projection(const RunConfig& config) {
  const auto layout = model_layout(config.model);
  const std::size_t d = natural_subspace_dim(config.projection, layout) ? 0 : config.d;
  auto map = build_projection(config.projection, layout, d, run_seeds(config.seed).projection);
  map->set_threads(config.threads);
  return map;
}

RunMetrics train(const RunConfig& config, const SubspaceMap& projection) {
  if (config.model.precision == Precision::f64) return train_impl<double>(config, projection);
  return train_impl<float>(config, projection);
}

RunMetrics train(const RunConfig& config) {
  const auto projection = make_run_projection(config);
  return train(config, *projection);
}

}  // namespace sublora
