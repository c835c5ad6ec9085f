// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Optional argument: a criterion number to run alone.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sublora/ablation.hpp"
#include "sublora/adapter.hpp"
#include "sublora/bench.hpp"
#include "sublora/checkpoint.hpp"
#include "sublora/dense.hpp"
#include "sublora/fastfood.hpp"
#include "sublora/model.hpp"
#include "sublora/onehot.hpp"
#include "sublora/projection_factory.hpp"
#include "sublora/structured.hpp"
#include "sublora/train.hpp"

namespace fs = std::filesystem;
using namespace sublora;
using namespace sublora::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Instance {
  std::uint64_t seed;
  std::size_t D;
  std::size_t d;
};

// 100 random small instances shared by the first two criteria.
std::vector<Instance> small_instances() {
  std::mt19937_64 gen(20260915);
  std::vector<Instance> out;
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 1000)(gen);
    const std::size_t D = std::uniform_int_distribution<std::size_t>(d, 10000)(gen);
    out.push_back({gen(), D, d});
  }
  return out;
}

Outcome exact_orthonormality() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& inst : small_instances()) {
    const auto p = OneHotProjection::build(inst.D, inst.d, inst.seed);
    const Eigen::MatrixXd dense = p.materialize_dense();
    const Eigen::SparseMatrix<double> sp = dense.sparseView();
    Eigen::MatrixXd gram = Eigen::MatrixXd(Eigen::SparseMatrix<double>(sp.transpose() * sp));
    gram -= Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    worst = std::max(worst, gram.cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 60.0,
          "100 instances, max |P^T P - I| = " + fmt(worst) + " (<= 1e-12), " + fmt(t) + " s (< 60 s)"};
}

template <typename S>
double pair_isometry_error(const SubspaceMap& p, const std::vector<double>& x,
                           const std::vector<double>& y) {
  const std::vector<S> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  const auto px = p.project<S>(xs);
  const auto py = p.project<S>(ys);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double diff = static_cast<double>(px[i]) - static_cast<double>(py[i]);
    num += diff * diff;
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double diff = static_cast<double>(xs[j]) - static_cast<double>(ys[j]);
    den += diff * diff;
  }
  return std::abs(std::sqrt(num) - std::sqrt(den)) / std::sqrt(den);
}

Outcome isometry() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(77);
  double worst64 = 0.0, worst32 = 0.0;
  auto check = [&](const OneHotProjection& p, int pairs) {
    for (int k = 0; k < pairs; ++k) {
      const auto x = random_vector(p.subspace_dim(), gen);
      const auto y = random_vector(p.subspace_dim(), gen);
      worst64 = std::max(worst64, pair_isometry_error<double>(p, x, y));
      worst32 = std::max(worst32, pair_isometry_error<float>(p, x, y));
    }
  };
  for (const auto& inst : small_instances()) check(OneHotProjection::build(inst.D, inst.d, inst.seed), 10);
  for (std::uint64_t s = 0; s < 3; ++s) check(OneHotProjection::build(1'000'000, 10'000, 900 + s), 4);
  const double t = seconds_since(t0);
  return {worst64 <= 1e-12 && worst32 <= 1e-5 && t < 60.0,
          "max rel error f64 " + fmt(worst64) + " (<= 1e-12), f32 " + fmt(worst32) +
              " (<= 1e-5), incl. D = 1e6, d = 1e4, " + fmt(t) + " s (< 60 s)"};
}

Outcome oracle_equivalence() {
  std::mt19937_64 gen(31);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 500)(gen);
    const std::size_t D = std::uniform_int_distribution<std::size_t>(d, 10000)(gen);
    const auto p = OneHotProjection::build(D, d, gen());
    const auto x = random_vector(d, gen);
    const std::vector<float> xf(x.begin(), x.end());
    const auto got = p.project<float>(xf);
    const Eigen::VectorXd ref =
        p.materialize_dense() * Eigen::Map<const Eigen::VectorXf>(xf.data(), static_cast<Eigen::Index>(d)).cast<double>();
    double num = 0.0;
    for (std::size_t i = 0; i < D; ++i) num += std::pow(got[i] - ref(static_cast<Eigen::Index>(i)), 2);
    worst = std::max(worst, std::sqrt(num) / ref.norm());
  }

  // Per-module gathered factors, flattened B then A row-major, against apply.
  bool bitwise = true;
  std::size_t compared = 0;
  for (int k = 0; k < 20; ++k) {
    ParameterSpaceLayout layout;
    const int modules = std::uniform_int_distribution<int>(1, 5)(gen);
    for (int l = 0; l < modules; ++l) {
      const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 40)(gen);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(gen);
      const std::size_t r = std::uniform_int_distribution<std::size_t>(1, std::min(m, n))(gen);
      layout.register_module({"layer" + std::to_string(l) + ".w", m, n, r});
    }
    const std::size_t D = layout.total_dim();
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, D)(gen);
    const auto p = OneHotProjection::build(D, d, gen());
    const auto x = random_vector(d, gen);
    const std::vector<float> xf(x.begin(), x.end());
    const auto full = p.project<float>(xf);
    for (std::size_t l = 0; l < layout.size(); ++l) {
      const auto& s = layout.module(l);
      const auto adapter = make_adapter<float>(layout, p, s.name);
      const auto a = adapter.gather_a(xf);  // n x r
      const auto b = adapter.gather_b(xf);  // r x m
      std::size_t pos = layout.offsets(l).b_offset;
      for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t kk = 0; kk < s.r; ++kk, ++compared)
          bitwise &= b(static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(i)) == full[pos++];
      for (std::size_t kk = 0; kk < s.r; ++kk)
        for (std::size_t c = 0; c < s.n; ++c, ++compared)
          bitwise &= a(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(kk)) == full[pos++];
    }
  }
  return {worst <= 1e-6 && bitwise,
          "apply vs dense (f32) max rel " + fmt(worst) + " (<= 1e-6); gather == apply bitwise on " +
              std::to_string(compared) + " entries: " + (bitwise ? "yes" : "NO")};
}

// --- gradients --------------------------------------------------------------

RunConfig gradient_mlp_config() {
  RunConfig c;
  c.model.architecture = Architecture::mlp;
  c.model.task = TaskKind::teacher_student;
  c.model.depth = 2;
  c.model.width = 24;
  c.model.input_dim = 16;
  c.model.output_dim = 4;
  c.model.rank = 4;  // D = 464
  c.n_train = 32;
  c.n_eval = 8;
  c.plant = PlantMode::full;
  c.seed = 5;
  return c;
}

RunConfig gradient_transformer_config() {
  RunConfig c;
  c.model.architecture = Architecture::toy_transformer;
  c.model.task = TaskKind::char_lm;
  c.model.depth = 1;
  c.model.width = 8;
  c.model.heads = 2;
  c.model.seq_len = 6;
  c.model.rank = 2;
  c.model.adapted = "all";  // D = 224
  c.n_train = 4;
  c.n_eval = 2;
  c.seed = 9;
  return c;
}

// Analytic d loss / d theta_d in precision S, against a double-precision
// central difference on the same network.
template <typename S>
double model_gradient_error(const RunConfig& base, ProjectionKind kind, std::size_t d) {
  RunConfig cfg = base;
  cfg.projection = kind;
  cfg.d = d;
  const auto proj = make_run_projection(cfg);
  const auto* onehot = dynamic_cast<const OneHotProjection*>(proj.get());
  const auto data = prepare_task(cfg, proj.get());
  const auto seeds = run_seeds(cfg.seed);
  const std::size_t dd = proj->subspace_dim();

  std::mt19937_64 gen(cfg.seed + static_cast<std::uint64_t>(kind));
  std::vector<double> theta = random_vector(dd, gen, 0.3);

  auto model = make_model<S>(cfg.model, seeds.model);
  model->bind(onehot);
  const std::vector<S> theta_s(theta.begin(), theta.end());
  std::vector<S> grad_s;
  if (onehot) {
    grad_s.resize(dd);
    model->loss(data.train, theta_s, grad_s, {});
  } else {
    std::vector<S> grad_D(proj->full_dim());
    model->loss(data.train, proj->project<S>(theta_s), grad_D, {});
    grad_s = proj->project_transpose<S>(grad_D);
  }
  const std::vector<double> grad(grad_s.begin(), grad_s.end());

  auto ref_model = make_model<double>(cfg.model, seeds.model);
  ref_model->bind(nullptr);
  auto f = [&](std::span<const double> t) {
    const auto theta_D = proj->project<double>(t);
    return ref_model->loss(data.train, theta_D, {}, {});
  };
  std::vector<double> fd(dd);
  for (std::size_t j = 0; j < dd; ++j) fd[j] = central_difference(f, theta, j, 1e-3);
  return normwise_relative_error(grad, fd);
}

Outcome gradient_correctness() {
  const auto mlp = gradient_mlp_config();
  const auto tr = gradient_transformer_config();
  struct Case {
    const char* label;
    const RunConfig* cfg;
    ProjectionKind kind;
    std::size_t d;
  };
  const Case cases[] = {
      {"mlp/onehot", &mlp, ProjectionKind::onehot, 200},
      {"mlp/identity", &mlp, ProjectionKind::identity, 0},
      {"mlp/dense", &mlp, ProjectionKind::dense, 200},
      {"transformer/onehot", &tr, ProjectionKind::onehot, 100},
      {"transformer/identity", &tr, ProjectionKind::identity, 0},
      {"transformer/dense", &tr, ProjectionKind::dense, 100},
  };
  bool ok = true;
  double w32 = 0.0, w64 = 0.0;
  std::string worst_case32, worst_case64;
  for (const auto& c : cases) {
    const double e32 = model_gradient_error<float>(*c.cfg, c.kind, c.d);
    const double e64 = model_gradient_error<double>(*c.cfg, c.kind, c.d);
    ok &= e32 <= 1e-4 && e64 <= 1e-8;
    if (e32 >= w32) w32 = e32, worst_case32 = c.label;
    if (e64 >= w64) w64 = e64, worst_case64 = c.label;
  }
  const auto D = model_layout(mlp.model).total_dim();
  return {ok, "6 cases (mlp D = " + std::to_string(D) + ", transformer), max rel err f32 " + fmt(w32) + " [" +
                  worst_case32 + "] (<= 1e-4), f64 " + fmt(w64) + " [" + worst_case64 + "] (<= 1e-8)"};
}

// --- training ---------------------------------------------------------------

RunConfig recovery_config() {
  RunConfig c;
  c.model.architecture = Architecture::mlp;
  c.model.task = TaskKind::teacher_student;
  c.model.depth = 2;
  c.model.width = 16;
  c.model.input_dim = 16;
  c.model.output_dim = 4;
  c.model.rank = 4;
  c.projection = ProjectionKind::onehot;
  c.d = 256;
  c.steps = 2000;
  c.optimizer.lr = 1e-2;
  c.n_train = 512;
  c.n_eval = 256;
  c.plant = PlantMode::nested;
  c.d_star = 64;
  c.planted_scale = 0.2;
  return c;
}

Outcome identity_reduction() {
  RunConfig cfg = recovery_config();
  cfg.model.precision = Precision::f64;
  cfg.projection = ProjectionKind::identity;
  cfg.steps = 200;
  cfg.plant = PlantMode::full;
  cfg.seed = 11;
  const RunMetrics metrics = train(cfg);

  const auto layout = model_layout(cfg.model);
  auto base = make_model<double>(cfg.model, run_seeds(cfg.seed).model);
  const LoraMlpOracle oracle(*base, layout);
  const auto data = prepare_task(cfg, nullptr);
  std::vector<double> theta = initial_theta(cfg, layout.total_dim());
  std::vector<double> grad(theta.size());
  OracleAdamW opt{cfg.optimizer.lr};
  opt.total = cfg.steps;
  double worst = 0.0;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const double loss = oracle.loss(data.train.x, data.train.y, theta, grad);
    worst = std::max(worst, std::abs(loss - metrics.loss_curve.at(s)));
    opt.step(theta, grad);
  }
  return {worst <= 1e-6 && metrics.loss_curve.size() == cfg.steps,
          "200 steps, max |loss - explicit LoRA loss| = " + fmt(worst) + " (<= 1e-6)"};
}

Outcome subspace_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = recovery_config();
  int passed = 0;
  double worst = 0.0, worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto m = train(cfg);
    const double excess = m.final_eval - m.optimum_eval;
    passed += excess <= 1e-2;
    worst = std::max(worst, excess);
    worst_ratio = std::max(worst_ratio, excess / (m.initial_eval - m.optimum_eval));
  }
  const double t = seconds_since(t0);
  return {passed == 5 && t < 300.0,
          std::to_string(passed) + "/5 seeds, worst excess eval MSE " + fmt(worst) +
              " (<= 1e-2; worst fraction of initial excess " + fmt(worst_ratio) + "), d = 256, d* = 64, " +
              fmt(t) + " s (< 300 s)"};
}

Outcome ablation_directionality() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = recovery_config();
  cfg.plant = PlantMode::subspace;
  cfg.d = 64;
  const std::vector<AblationVariant> variants = {
      {"identity", ProjectionKind::identity, 0},
      {"uniform-global", ProjectionKind::onehot, 0},
      {"non-uniform", ProjectionKind::nonuniform_onehot, 0},
      {"local", ProjectionKind::local_onehot, 0},
  };
  const auto table = run_ablation(cfg, variants, 5);
  const double t = seconds_since(t0);
  const auto& uni = table.rows[1];
  const auto& non = table.rows[2];
  const auto& loc = table.rows[3];
  std::ostringstream info;
  info << "median eval MSE over 5 seeds at d = 64: uniform-global " << fmt(uni.median) << " vs non-uniform "
       << fmt(non.median) << " (required <=); reported: local " << fmt(loc.median) << " ("
       << (uni.median <= loc.median ? "global <= local" : "local < global") << "), identity reference "
       << fmt(table.rows[0].median) << ", " << fmt(t) << " s (< 900 s)";
  return {uni.median <= non.median && t < 900.0, info.str()};
}

Outcome complexity_separation() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t D = std::size_t{1} << 22;
  BenchOptions opt;
  opt.repetitions = 15;
  double lo = 1e300, hi = 0.0, onehot16 = 0.0;
  std::ostringstream times;
  for (int e : {8, 12, 16}) {
    const auto r = bench_apply(ProjectionKind::onehot, D, std::size_t{1} << e, opt);
    lo = std::min(lo, r.time.median);
    hi = std::max(hi, r.time.median);
    if (e == 16) onehot16 = r.time.median;
    times << (e == 8 ? "" : ", ") << "2^" << e << ": " << fmt(r.time.median) << " s";
  }
  const auto ff = bench_apply(ProjectionKind::fastfood, D, std::size_t{1} << 16, opt);
  const double spread = hi / lo - 1.0;
  const double ratio = ff.time.median / onehot16;
  const double t = seconds_since(t0);
  return {spread < 0.20 && ratio >= 2.0 && t < 300.0,
          "D = 2^22 one-hot medians {" + times.str() + "} spread " + fmt(spread) +
              " (< 0.20); fastfood/one-hot at d = 2^16 = " + fmt(ratio) + " (>= 2), " + fmt(t) + " s"};
}

Outcome storage() {
  const fs::path dir = fs::temp_directory_path() / "sublora-acceptance";
  fs::create_directories(dir);
  ParameterSpaceLayout layout;
  layout.register_module({"layer0.q", 32, 32, 4});
  layout.register_module({"layer0.v", 32, 32, 4});
  layout.register_module({"layer1.q", 32, 32, 4});
  const std::size_t D = layout.total_dim();
  bool sizes = true, roundtrip = true, identical = true;
  std::mt19937_64 gen(4242);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, D)(gen);
    const auto p = OneHotProjection::build(D, d, seed * 7919 + 1);
    const auto theta = random_vector(d, gen);
    const std::vector<float> tf(theta.begin(), theta.end());
    const auto before = p.project<float>(tf);
    const fs::path path = dir / "ckpt.slr";
    save_checkpoint(path, make_checkpoint(p, layout, std::span<const float>(tf)));
    sizes &= fs::file_size(path) == kCheckpointHeaderBytes + 4 * d;
    const auto loaded = load_checkpoint(path, layout);
    sizes &= loaded.checkpoint.theta_d.size() == d;
    const auto& rebuilt = dynamic_cast<const OneHotProjection&>(*loaded.projection);
    identical &= std::equal(rebuilt.index().begin(), rebuilt.index().end(), p.index().begin(), p.index().end());
    const auto after = rebuilt.project<float>(loaded.checkpoint.theta_d);
    roundtrip &= std::equal(before.begin(), before.end(), after.begin(), after.end(),
                            [](float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); });
  }
  fs::remove_all(dir);
  return {sizes && roundtrip && identical,
          std::string("100 seeds: file = 41 + 4d bytes with d payload scalars: ") + (sizes ? "yes" : "NO") +
              ", apply round-trip bitwise: " + (roundtrip ? "yes" : "NO") +
              ", rebuilt index identical: " + (identical ? "yes" : "NO")};
}

Outcome fastfood_correctness() {
  std::mt19937_64 gen(99);
  double inv = 0.0;
  for (std::size_t n : {1u, 2u, 64u, 1024u, 65536u}) {
    const auto x = random_vector(n, gen);
    auto y = x;
    fwht_inplace<double>(y);
    fwht_inplace<double>(y);
    for (std::size_t i = 0; i < n; ++i) inv = std::max(inv, std::abs(y[i] / static_cast<double>(n) - x[i]));
  }

  double block_err = 0.0;
  for (auto [D, d] : {std::pair<std::size_t, std::size_t>{100, 7}, {300, 64}, {1000, 100}, {513, 256}}) {
    const auto p = FastfoodProjection::build(D, d, D * 31 + d);
    const std::size_t n = p.padded_dim();
    const Eigen::MatrixXd H = hadamard(n);
    Eigen::MatrixXd full(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(d));
    std::size_t row = 0;
    for (const auto& blk : p.blocks()) {
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n), G = S, Pi = S;
      for (std::size_t k = 0; k < n; ++k) {
        S(k, k) = blk.signs[k];
        G(k, k) = blk.gauss[k];
        Pi(k, blk.perm[k]) = 1.0;
      }
      const Eigen::MatrixXd M = blk.scale * H * G * Pi * H * S;
      const auto take = std::min<std::size_t>(n, D - row);
      full.middleRows(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(take)) =
          M.topLeftCorner(static_cast<Eigen::Index>(take), static_cast<Eigen::Index>(d));
      row += take;
    }
    for (int k = 0; k < 5; ++k) {
      const auto x = random_vector(d, gen);
      const auto got = p.project<double>(x);
      const Eigen::VectorXd ref = full * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < D; ++i)
        block_err = std::max(block_err, std::abs(got[i] - ref(static_cast<Eigen::Index>(i))) / ref.cwiseAbs().maxCoeff());
    }
  }

  double mean_err = 0.0;
  int count = 0;
  for (std::size_t d : {256u, 1024u, 4096u}) {
    const auto p = FastfoodProjection::build(100000, d, d);
    for (int k = 0; k < 20; ++k, ++count)
      mean_err += pair_isometry_error<double>(p, random_vector(d, gen), random_vector(d, gen));
  }
  mean_err /= count;
  return {inv <= 1e-12 && block_err <= 1e-10 && mean_err <= 0.05,
          "fwht involution " + fmt(inv) + " (<= 1e-12), materialized blocks " + fmt(block_err) +
              " (<= 1e-10), mean isometry error at d >= 256 " + fmt(mean_err) + " (<= 0.05)"};
}

double max_abs_diff(const std::vector<double>& a, const Eigen::VectorXd& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
  return e;
}

Outcome structured_reconstructions() {
  std::mt19937_64 gen(5);
  ParameterSpaceLayout layout;
  layout.register_module({"layer0.q", 6, 5, 2});
  layout.register_module({"layer0.v", 4, 7, 3});
  layout.register_module({"layer1.q", 6, 6, 2});
  const std::size_t D = layout.total_dim();

  double err = 0.0;
  bool trivial = true;

  const VeraReconstruction vera(layout, 17);
  const std::size_t dv = vera.subspace_dim();
  {
    const auto x = random_vector(dv, gen);
    err = std::max(err, max_abs_diff(vera.project<double>(x),
                                     vera.materialize_dense() * Eigen::Map<const Eigen::VectorXd>(x.data(), dv)));
    // Zero diagonals give zero factors; unit diagonals reproduce the shared factors.
    const auto zero = vera.project<double>(std::vector<double>(dv, 0.0));
    trivial &= std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; });
    const auto ones = vera.project<double>(std::vector<double>(dv, 1.0));
    for (std::size_t l = 0; l < layout.size(); ++l) {
      const auto& s = layout.module(l);
      for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t k = 0; k < s.r; ++k)
          trivial &= ones[layout.locate(l, Block::B, i, k)] == vera.shared_b()(i, k);
      for (std::size_t k = 0; k < s.r; ++k)
        for (std::size_t c = 0; c < s.n; ++c)
          trivial &= ones[layout.locate(l, Block::A, k, c)] == vera.shared_a()(k, c);
    }
  }

  const LoraXsReconstruction xs(layout, 23);
  const std::size_t dx = xs.subspace_dim();
  {
    const auto x = random_vector(dx, gen);
    const Eigen::VectorXd ref =
        xs.materialize_dense() * Eigen::Map<const Eigen::VectorXd>(x.data(), dx) + xs.offset();
    err = std::max(err, max_abs_diff(xs.project<double>(x), ref));
    // R = 0 leaves only the frozen A factors; R = I gives B = P_B.
    std::vector<double> identity_core;
    for (const auto& s : layout.modules())
      for (std::size_t c = 0; c < s.r; ++c)
        for (std::size_t k = 0; k < s.r; ++k) identity_core.push_back(k == c ? 1.0 : 0.0);
    const auto zero = xs.project<double>(std::vector<double>(dx, 0.0));
    const auto eye = xs.project<double>(identity_core);
    for (std::size_t l = 0; l < layout.size(); ++l) {
      const auto& s = layout.module(l);
      for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t k = 0; k < s.r; ++k) {
          const auto pos = layout.locate(l, Block::B, i, k);
          trivial &= zero[pos] == 0.0 && eye[pos] == xs.factor_b(l)(i, k);
        }
      for (std::size_t k = 0; k < s.r; ++k)
        for (std::size_t c = 0; c < s.n; ++c) {
          const auto pos = layout.locate(l, Block::A, k, c);
          trivial &= zero[pos] == xs.factor_a(l)(k, c) && eye[pos] == xs.factor_a(l)(k, c);
        }
    }
  }
  return {err <= 1e-10 && trivial,
          "D = " + std::to_string(D) + ", max |apply - materialized| " + fmt(err) +
              " (<= 1e-10); zero/unit diagonals and R in {0, I} exact: " + (trivial ? "yes" : "NO")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "exact orthonormality", exact_orthonormality},
      {2, "isometry", isometry},
      {3, "sparse/dense oracle equivalence", oracle_equivalence},
      {4, "gradient correctness", gradient_correctness},
      {5, "identity reduction", identity_reduction},
      {6, "subspace recovery", subspace_recovery},
      {7, "ablation directionality", ablation_directionality},
      {8, "complexity separation", complexity_separation},
      {9, "storage", storage},
      {10, "fastfood correctness", fastfood_correctness},
      {11, "structured reconstructions", structured_reconstructions},
  };
  const char* arg = argc > 1 ? argv[1] : "";
  if (*arg == 'C' || *arg == 'c') ++arg;
  const int only = std::atoi(arg);
  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s C%-2d %-32s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
