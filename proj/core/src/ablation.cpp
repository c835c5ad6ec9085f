// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sublora/model.hpp"
#include "sublora/philox.hpp"
#include "sublora/projection_factory.hpp"

namespace sublora {

AblationRow summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("no values to summarize");
  AblationRow row;
  row.finals = values;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  row.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  row.min = values.front();
  row.max = values.back();
  if (n > 1) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    row.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return row;
}

AblationTable run_ablation(const RunConfig& base, std::span<const AblationVariant> variants,
                           std::size_t trials) {
  if (variants.empty()) throw std::invalid_argument("no ablation variants given");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (base.model.task == TaskKind::teacher_student && base.plant == PlantMode::nested)
    throw std::invalid_argument(
        "ablations need a teacher independent of the projection (plant = subspace or full)");

  const auto layout = model_layout(base.model);
  std::vector<std::size_t> dims;
  std::size_t shared = 0;
  for (const auto& v : variants) {
    std::size_t d = v.d ? v.d : base.d;
    if (auto natural = natural_subspace_dim(v.kind, layout)) {
      if (v.d && v.d != *natural)
        throw std::invalid_argument("variant '" + v.label + "' cannot have d = " +
                                    std::to_string(v.d));
      d = *natural;
    }
    dims.push_back(d);
    if (v.kind == ProjectionKind::identity) continue;
    if (shared == 0) shared = d;
    if (d != shared)
      throw std::invalid_argument("dimension mismatch: variant '" + v.label + "' has d = " +
                                  std::to_string(d) + ", others have d = " +
                                  std::to_string(shared));
  }

  AblationTable table;
  table.metric = std::string(metric_name(base.model.task));
  table.trials = trials;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    std::vector<double> finals;
    for (std::size_t t = 0; t < trials; ++t) {
      RunConfig run = base;
      run.seed = derive_seed(base.seed, t);
      run.projection = variants[i].kind;
      run.d = dims[i];
      finals.push_back(train(run).final_eval);
    }
    AblationRow row = summarize(std::move(finals));
    row.label = variants[i].label;
    row.kind = variants[i].kind;
    row.d = dims[i];
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sublora
