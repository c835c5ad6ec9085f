// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/onehot.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "sublora/philox.hpp"

namespace sublora {

std::vector<std::uint32_t> draw_uniform_indices(std::size_t rows, std::uint32_t lo,
                                                std::uint32_t hi, std::uint64_t seed,
                                                std::uint64_t position_base) {
  if (hi <= lo) throw std::invalid_argument("empty index range");
  const CounterRng rng(seed, Stream::onehot_index);
  const std::uint64_t width = hi - lo;
  std::vector<std::uint32_t> index(rows);
  for (std::size_t i = 0; i < rows; ++i)
    index[i] = lo + static_cast<std::uint32_t>(rng.below(position_base + i, width));
  return index;
}

std::size_t repair_empty_columns(std::span<std::uint32_t> index, std::uint32_t lo,
                                 std::uint32_t hi) {
  const std::size_t width = hi - lo;
  std::vector<std::size_t> counts(width, 0);
  std::size_t members = 0;
  for (auto v : index) {
    if (v >= lo && v < hi) {
      ++counts[v - lo];
      ++members;
    }
  }
  if (members < width)
    throw std::invalid_argument("cannot fill " + std::to_string(width) + " columns from " +
                                std::to_string(members) + " rows");

  std::vector<std::uint32_t> empty;
  for (std::size_t j = 0; j < width; ++j)
    if (counts[j] == 0) empty.push_back(static_cast<std::uint32_t>(j));
  if (empty.empty()) return 0;

  // Rows of each column in ascending order (CSR), consumed from the front.
  std::vector<std::size_t> start(width + 1, 0);
  for (std::size_t j = 0; j < width; ++j) start[j + 1] = start[j] + counts[j];
  std::vector<std::size_t> rows(members);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto v = index[i];
      if (v >= lo && v < hi) rows[fill[v - lo]++] = i;
    }
  }
  std::vector<std::size_t> cursor(start.begin(), start.end() - 1);

  // Max count first, then lowest column id. Stale entries are skipped.
  using Entry = std::pair<std::size_t, std::int64_t>;  // (count, -column)
  std::priority_queue<Entry> heap;
  for (std::size_t j = 0; j < width; ++j)
    if (counts[j] > 1) heap.emplace(counts[j], -static_cast<std::int64_t>(j));

  for (auto target : empty) {
    while (true) {
      const auto [c, neg_col] = heap.top();
      heap.pop();
      const auto donor = static_cast<std::size_t>(-neg_col);
      if (counts[donor] != c) continue;
      const std::size_t row = rows[cursor[donor]++];
      index[row] = lo + target;
      --counts[donor];
      counts[target] = 1;
      if (counts[donor] > 1) heap.emplace(counts[donor], neg_col);
      break;
    }
  }
  return empty.size();
}

OneHotProjection::OneHotProjection(std::vector<std::uint32_t> index, std::size_t d,
                                   ProjectionKind kind, std::uint64_t seed)
    : kind_(kind), seed_(seed), index_(std::move(index)), counts_(d, 0) {
  for (auto v : index_) {
    if (v >= d) throw std::invalid_argument("index value out of range");
    ++counts_[v];
  }
  column_norms_.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (counts_[j] == 0)
      throw std::invalid_argument("column " + std::to_string(j) + " of the projection is empty");
    column_norms_[j] = 1.0 / std::sqrt(static_cast<double>(counts_[j]));
  }
  norms_.resize(index_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) norms_[i] = column_norms_[index_[i]];
}

OneHotProjection OneHotProjection::build(std::size_t D, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("subspace dimension must be positive");
  if (d > D) throw std::invalid_argument("subspace dimension exceeds full dimension");
  if (d > 0xFFFFFFFFull) throw std::invalid_argument("subspace dimension exceeds 2^32 - 1");
  auto index = draw_uniform_indices(D, 0, static_cast<std::uint32_t>(d), seed);
  repair_empty_columns(index, 0, static_cast<std::uint32_t>(d));
  return OneHotProjection(std::move(index), d, ProjectionKind::onehot, seed);
}

OneHotProjection OneHotProjection::identity(std::size_t D) {
  if (D == 0) throw std::invalid_argument("full dimension must be positive");
  std::vector<std::uint32_t> index(D);
  std::iota(index.begin(), index.end(), 0u);
  return OneHotProjection(std::move(index), D, ProjectionKind::identity, 0);
}

OneHotProjection OneHotProjection::from_assignment(std::vector<std::uint32_t> index,
                                                   std::size_t d, ProjectionKind kind,
                                                   std::uint64_t seed) {
  if (d == 0 || d > index.size())
    throw std::invalid_argument("subspace dimension must be in [1, D]");
  return OneHotProjection(std::move(index), d, kind, seed);
}

template <typename S>
void OneHotProjection::apply_impl(std::span<const S> theta_d, std::span<S> theta_D) const {
  check_apply_sizes(theta_d.size(), theta_D.size());
  // theta_d[j] * norm_j once per column; norms_[i] equals column_norms_[index_[i]]
  // exactly, so this is bit-identical to the per-row product.
  thread_local std::vector<S> scaled;
  scaled.resize(theta_d.size());
  for (std::size_t j = 0; j < scaled.size(); ++j)
    scaled[j] = theta_d[j] * static_cast<S>(column_norms_[j]);
  const std::uint32_t* idx = index_.data();
  const S* src = scaled.data();
  S* dst = theta_D.data();
  detail::parallel_chunks(index_.size(), threads(), [=](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) dst[i] = src[idx[i]];
  });
}

template <typename S>
void OneHotProjection::transpose_impl(std::span<const S> g_D, std::span<S> g_d) const {
  check_transpose_sizes(g_D.size(), g_d.size());
  std::fill(g_d.begin(), g_d.end(), S{0});
  for (std::size_t i = 0; i < index_.size(); ++i)
    g_d[index_[i]] += g_D[i] * static_cast<S>(norms_[i]);
}

void OneHotProjection::apply(std::span<const float> t, std::span<float> o) const { apply_impl(t, o); }
void OneHotProjection::apply(std::span<const double> t, std::span<double> o) const { apply_impl(t, o); }
void OneHotProjection::apply_transpose(std::span<const float> g, std::span<float> o) const {
  transpose_impl(g, o);
}
void OneHotProjection::apply_transpose(std::span<const double> g, std::span<double> o) const {
  transpose_impl(g, o);
}

Eigen::MatrixXd OneHotProjection::materialize_dense(std::size_t max_entries) const {
  const std::size_t D = full_dim();
  const std::size_t d = subspace_dim();
  if (d != 0 && D > max_entries / d)
    throw std::length_error("dense materialization exceeds the size guard");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(D),
                                            static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < D; ++i)
    P(static_cast<Eigen::Index>(i), index_[i]) = norms_[i];
  return P;
}

}  // namespace sublora
