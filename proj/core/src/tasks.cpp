// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/tasks.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sublora/philox.hpp"

namespace sublora {

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::teacher_student: return "teacher-student";
    case TaskKind::classification: return "classification";
    case TaskKind::char_lm: return "char-lm";
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view text) {
  for (auto k : {TaskKind::teacher_student, TaskKind::classification, TaskKind::char_lm})
    if (to_string(k) == text) return k;
  throw std::invalid_argument("unknown task '" + std::string(text) + "'");
}

std::size_t TaskData::size() const noexcept {
  return kind == TaskKind::char_lm ? inputs.size() : static_cast<std::size_t>(x.rows());
}

TaskData TaskData::subset(std::span<const std::size_t> rows) const {
  TaskData out;
  out.kind = kind;
  if (kind == TaskKind::char_lm) {
    for (auto r : rows) {
      out.inputs.push_back(inputs.at(r));
      out.targets.push_back(targets.at(r));
    }
    return out;
  }
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  if (y.size()) out.y.resize(static_cast<Eigen::Index>(rows.size()), y.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    if (src >= x.rows()) throw std::out_of_range("row index beyond split");
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(src);
    if (y.size()) out.y.row(static_cast<Eigen::Index>(i)) = y.row(src);
    if (!labels.empty()) out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

TaskSplits make_regression_inputs(std::size_t input_dim, std::size_t n_train, std::size_t n_eval,
                                  std::uint64_t seed) {
  RngStream rng(seed, Stream::task_data);
  auto fill = [&](std::size_t n) {
    TaskData t;
    t.kind = TaskKind::teacher_student;
    t.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(input_dim));
    for (Eigen::Index i = 0; i < t.x.rows(); ++i)
      for (Eigen::Index j = 0; j < t.x.cols(); ++j) t.x(i, j) = rng.normal();
    return t;
  };
  TaskSplits s;
  s.train = fill(n_train);
  s.eval = fill(n_eval);
  return s;
}

TaskSplits make_classification(std::size_t input_dim, std::size_t n_train, std::size_t n_eval,
                               double separation, std::uint64_t seed) {
  RngStream rng(seed, Stream::task_data);
  Vector<double> u(static_cast<Eigen::Index>(input_dim));
  for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = rng.normal();
  u.normalize();
  auto fill = [&](std::size_t n) {
    TaskData t;
    t.kind = TaskKind::classification;
    t.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(input_dim));
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(i % 2);
      const double sign = label == 1 ? 1.0 : -1.0;
      for (Eigen::Index j = 0; j < t.x.cols(); ++j)
        t.x(static_cast<Eigen::Index>(i), j) = sign * separation * u(j) + rng.normal();
      t.labels.push_back(label);
    }
    return t;
  };
  TaskSplits s;
  s.train = fill(n_train);
  s.eval = fill(n_eval);
  return s;
}

TaskSplits make_char_lm(std::string_view text, std::size_t seq_len, std::size_t n_train,
                        std::size_t n_eval, std::uint64_t seed) {
  if (seq_len == 0) throw std::invalid_argument("sequence length must be positive");
  const std::size_t cut = text.size() * 9 / 10;
  if (cut < seq_len + 2 || text.size() - cut < seq_len + 2)
    throw std::invalid_argument("corpus too short for the requested sequence length");
  auto byte = [&](std::size_t i) {
    const auto c = static_cast<unsigned char>(text[i]);
    return c < 128 ? static_cast<int>(c) : static_cast<int>('?');
  };
  RngStream rng(seed, Stream::task_data);
  auto fill = [&](std::size_t n, std::size_t begin, std::size_t end) {
    TaskData t;
    t.kind = TaskKind::char_lm;
    const std::size_t starts = end - begin - seq_len;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s0 = begin + static_cast<std::size_t>(rng.below(starts));
      std::vector<int> in(seq_len), tg(seq_len);
      for (std::size_t k = 0; k < seq_len; ++k) {
        in[k] = byte(s0 + k);
        tg[k] = byte(s0 + k + 1);
      }
      t.inputs.push_back(std::move(in));
      t.targets.push_back(std::move(tg));
    }
    return t;
  };
  TaskSplits s;
  s.train = fill(n_train, 0, cut);
  s.eval = fill(n_eval, cut, text.size());
  return s;
}

std::string_view builtin_corpus() noexcept {
  return "The lighthouse keeper climbed the stairs every evening at the same hour. "
         "He counted the steps as he went, one hundred and twelve of them, and at the top "
         "he wiped the salt from the glass before he lit the lamp. The sea below was grey "
         "and restless, and the gulls turned slow circles over the rocks. On clear nights he "
         "could see the lights of the fishing boats far out on the water, small and yellow "
         "like sparks that refused to go out. He wrote the weather in a thick book with a "
         "blue cover: wind from the west, light rain, visibility good. In the morning he "
         "would trim the wick, polish the brass, and sleep until noon. The village sent a "
         "boat with bread and letters once a week. Most of the letters were from his sister, "
         "who lived in the city and wrote about the trams, the markets, the price of coal, "
         "and the new bridge that was being built across the river. He liked to read them "
         "twice, once quickly and once slowly, and then he put them in a tin box under the "
         "bed. In winter the storms came without warning. The waves struck the base of the "
         "tower with a sound like a door slamming in an empty house, and the whole building "
         "seemed to hum. On those nights he did not sleep at all. He sat by the lamp with a "
         "cup of tea going cold in his hands and watched the beam sweep across the dark "
         "water, around and around, patient and steady. A ship that saw the light would know "
         "where the rocks were. That was the whole of his work, and he believed it was "
         "enough. When spring came the keeper planted potatoes in the small garden behind "
         "the tower, and the gulls stole half of them. He did not mind. He mended the fence, "
         "painted the railing white, and taught himself to play a few songs on an old "
         "fiddle that a sailor had left behind years ago. The songs were simple and he "
         "played them badly, but the wind did not complain and neither did the sea. One "
         "evening a boy rowed out from the village with a basket of eggs and asked if he "
         "could see the lamp. The keeper showed him the lens, the clockwork that turned it, "
         "and the book with the blue cover. The boy asked why he wrote down the weather when "
         "nobody read it. The keeper thought for a long time and then said that somebody "
         "might, one day, and that it was better to have kept the record than to wish you "
         "had. The boy rowed home in the dusk, and from the shore he watched the light come "
         "on, first a glow and then a bright white arm reaching out over the waves. Years "
         "later, when the boy was grown and the lighthouse had been fitted with an electric "
         "lamp that needed no keeper, he found the blue book in a box at the harbour office. "
         "He read every page, one winter after another, wind from the west, light rain, "
         "visibility good, and he understood at last what the old man had meant.";
}

}  // namespace sublora
