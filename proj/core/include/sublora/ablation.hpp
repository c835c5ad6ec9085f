// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sublora/projection.hpp"
#include "sublora/train.hpp"

namespace sublora {

struct AblationVariant {
  std::string label;
  ProjectionKind kind = ProjectionKind::onehot;
  std::size_t d = 0;  // 0 = the base config's d (or the kind's natural d)
};

struct AblationRow {
  std::string label;
  ProjectionKind kind = ProjectionKind::onehot;
  std::size_t d = 0;
  std::vector<double> finals;  // final eval metric per trial
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

struct AblationTable {
  std::string metric;
  std::size_t trials = 0;
  std::vector<AblationRow> rows;
};

/// Trains every variant on `trials` seeds (trial t uses derive_seed(base.seed, t)),
/// keeping every other setting identical. All non-identity variants must share one
/// trainable dimension; the identity row is the full-space reference. The
/// teacher must not depend on the student's projection, so the nested plant
/// is refused.
AblationTable run_ablation(const RunConfig& base, std::span<const AblationVariant> variants,
                           std::size_t trials);

/// median / sample std / min / max of a non-empty sample.
AblationRow summarize(std::vector<double> values);

}  // namespace sublora
