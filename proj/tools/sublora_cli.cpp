// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sublora/ablation.hpp"
#include "sublora/bench.hpp"
#include "sublora/checkpoint.hpp"
#include "sublora/config.hpp"
#include "sublora/merged.hpp"
#include "sublora/model.hpp"
#include "sublora/onehot.hpp"
#include "sublora/projection_factory.hpp"
#include "sublora/train.hpp"
#include "sublora/verification.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sublora;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::string projection;
  std::optional<std::size_t> d;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
  std::string precision;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, Common& c, bool config_flag = true) {
  if (config_flag) cmd->add_option("--config", c.config, "Run configuration file");
  cmd->add_option("--projection", c.projection,
                  "onehot, fastfood, dense, identity, vera, lora-xs, local-onehot, nonuniform-onehot");
  cmd->add_option("--d", c.d, "Subspace dimension");
  cmd->add_option("--seed", c.seed, "Run seed");
  cmd->add_option("--threads", c.threads, "Worker threads for projection apply")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory (default: $SUBLORA_OUT_DIR or ./sublora-out)");
  cmd->add_option("--precision", c.precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
}

fs::path out_dir(const Common& c) {
  fs::path dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv("SUBLORA_OUT_DIR");
    dir = env && *env ? fs::path(env) : fs::path("sublora-out");
  }
  fs::create_directories(dir);
  return dir;
}

RunConfig resolve_config(const Common& c) {
  if (c.config.empty()) throw UsageError("--config is required");
  if (!fs::exists(c.config)) throw UsageError("config file '" + c.config + "' does not exist");
  RunConfig rc = load_run_config(c.config);
  if (!c.projection.empty()) rc.projection = parse_projection_kind(c.projection);
  if (c.d) rc.d = *c.d;
  if (c.seed) rc.seed = *c.seed;
  if (!c.precision.empty()) rc.model.precision = c.precision == "f64" ? Precision::f64 : Precision::f32;
  rc.threads = c.threads;
  return rc;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json summary_json(const RunConfig& rc, const RunMetrics& m) {
  return {{"record", "summary"},
          {"projection", to_string(rc.projection)},
          {"d", m.trainable_count},
          {"D", m.full_dim},
          {"seed", rc.seed},
          {"steps", m.loss_curve.size()},
          {"metric", m.metric},
          {"initial_eval", m.initial_eval},
          {"final_eval", m.final_eval},
          {"optimum_eval", m.optimum_eval},
          {"trainable_count", m.trainable_count},
          {"head_count", m.head_count},
          {"wall_seconds", m.wall_seconds},
          {"peak_bytes", m.peak_bytes},
          {"base_checksum_before", hex(m.base_checksum_before)},
          {"base_checksum_after", hex(m.base_checksum_after)}};
}

void write_head(const fs::path& path, const std::vector<double>& head) {
  std::vector<std::uint8_t> bytes;
  for (double v : head) le::put_f32(bytes, static_cast<float>(v));
  write_file_synced(path, bytes);
}

std::vector<float> read_head(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() % 4) throw std::runtime_error("corrupt head file '" + path.string() + "'");
  std::vector<float> head(bytes.size() / 4);
  for (std::size_t i = 0; i < head.size(); ++i) head[i] = le::get_f32(bytes.data() + 4 * i);
  return head;
}

int cmd_train(const Common& c) {
  const RunConfig rc = resolve_config(c);
  const fs::path dir = out_dir(c);
  const auto projection = make_run_projection(rc);
  const RunMetrics m = train(rc, *projection);

  {
    std::ofstream csv(dir / "metrics.csv");
    csv.precision(17);
    csv << "step,train_loss\n";
    for (std::size_t s = 0; s < m.loss_curve.size(); ++s) csv << s << ',' << m.loss_curve[s] << '\n';
  }
  {
    std::ofstream jl(dir / "metrics.jsonl");
    for (std::size_t s = 0; s < m.loss_curve.size(); ++s)
      jl << json{{"record", "step"}, {"step", s}, {"train_loss", m.loss_curve[s]}}.dump() << '\n';
    jl << summary_json(rc, m).dump() << '\n';
  }
  const auto layout = model_layout(rc.model);
  save_checkpoint(dir / "checkpoint.slr", make_checkpoint(*projection, layout, std::span<const double>(m.theta_d)));
  if (!m.head.empty()) write_head(dir / "head.f32", m.head);
  std::ofstream(dir / "run.cfg") << format_run_config(rc);

  std::cout << "projection " << to_string(rc.projection) << "  D " << m.full_dim << "  d "
            << m.trainable_count << "  steps " << m.loss_curve.size() << '\n'
            << m.metric << ": " << m.initial_eval << " -> " << m.final_eval;
  if (rc.model.task == TaskKind::teacher_student) std::cout << "  (teacher " << m.optimum_eval << ")";
  std::cout << "\nwall " << m.wall_seconds << " s, peak heap " << m.peak_bytes << " bytes\n"
            << "wrote " << (dir / "checkpoint.slr").string() << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint_arg) {
  const RunConfig rc = resolve_config(c);
  const fs::path dir = out_dir(c);
  const fs::path ckpt = checkpoint_arg.empty() ? dir / "checkpoint.slr" : fs::path(checkpoint_arg);
  const auto layout = model_layout(rc.model);
  const auto loaded = load_checkpoint(ckpt, layout);
  const auto& theta = loaded.checkpoint.theta_d;
  const TaskSplits data = prepare_task(rc, loaded.projection.get());
  const auto* onehot = dynamic_cast<const OneHotProjection*>(loaded.projection.get());

  auto model = make_model<float>(rc.model, run_seeds(rc.seed).model);
  model->bind(onehot);
  if (!model->head().empty()) {
    const fs::path head_path = ckpt.parent_path() / "head.f32";
    if (!fs::exists(head_path)) throw std::runtime_error("classifier head file '" + head_path.string() + "' is missing");
    const auto head = read_head(head_path);
    if (head.size() != model->head().size()) throw std::runtime_error("classifier head has the wrong size");
    std::copy(head.begin(), head.end(), model->head().begin());
  }
  std::vector<float> src = onehot ? theta : loaded.projection->project<float>(theta);
  const double value = evaluate<float>(*model, data.eval, src);
  std::cout << metric_name(rc.model.task) << ' ' << std::setprecision(9) << value << '\n';
  std::ofstream(dir / "eval.jsonl", std::ios::app)
      << json{{"record", "eval"}, {"checkpoint", ckpt.string()}, {"metric", metric_name(rc.model.task)},
              {"value", value}}.dump()
      << '\n';
  return 0;
}

ParameterSpaceLayout flat_layout(std::size_t D) {
  if (D < 2) throw UsageError("--full-dim must be at least 2");
  ParameterSpaceLayout layout;
  layout.register_module({"flat", D - 1, 1, 1});
  return layout;
}

int cmd_verify(const Common& c, std::size_t full_dim, std::size_t samples, double tol_arg) {
  ParameterSpaceLayout layout;
  if (!c.config.empty()) {
    layout = model_layout(resolve_config(c).model);
  } else if (full_dim) {
    layout = flat_layout(full_dim);
  } else {
    throw UsageError("verify needs --full-dim or --config");
  }
  const ProjectionKind kind = c.projection.empty() ? ProjectionKind::onehot : parse_projection_kind(c.projection);
  const std::size_t d = natural_subspace_dim(kind, layout) ? 0 : c.d.value_or(0);
  if (!natural_subspace_dim(kind, layout) && d == 0) throw UsageError("--d is required for this projection");
  const Precision precision = c.precision == "f64" ? Precision::f64 : Precision::f32;
  const double tol = tol_arg > 0 ? tol_arg : (precision == Precision::f64 ? 1e-12 : 1e-5);
  auto p = build_projection(kind, layout, d, c.seed.value_or(0));
  p->set_threads(c.threads);

  const bool exact = is_onehot_family(kind) || kind == ProjectionKind::dense;
  const double ortho = orthonormality_error(*p, std::min<std::size_t>(p->subspace_dim(), 64));
  const auto iso = verify_isometry(*p, samples, tol, c.seed.value_or(0) + 1, precision);
  const double adj = adjoint_error(*p, 8, c.seed.value_or(0) + 2);
  const double left = left_inverse_error(*p, 8, c.seed.value_or(0) + 3);

  std::cout << "projection " << to_string(kind) << "  D " << p->full_dim() << "  d " << p->subspace_dim()
            << "  precision " << (precision == Precision::f64 ? "f64" : "f32") << '\n'
            << std::scientific << std::setprecision(3)
            << "orthonormality  max |P^T P - I|   " << ortho << '\n'
            << "isometry        max rel error     " << iso.max_rel_err << "  (mean " << iso.mean_rel_err
            << ", " << iso.pairs << " pairs)\n"
            << "adjoint         rel error         " << adj << '\n'
            << "left inverse    rel error         " << left << '\n';
  if (!exact) {
    std::cout << "near-isometric projection: statistics only, no exactness verdict\n";
    return 0;
  }
  const double ortho_tol = precision == Precision::f64 ? 1e-12 : 1e-5;
  const bool ok = iso.pass && ortho <= ortho_tol && left <= tol && adj <= tol;
  std::cout << (ok ? "PASS" : "FAIL") << " at tolerance " << tol << '\n';
  return ok ? 0 : kExitFailure;
}

std::vector<std::size_t> parse_sizes(const std::vector<std::string>& items) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    if (s.rfind("2^", 0) == 0) out.push_back(std::size_t{1} << std::stoul(s.substr(2)));
    else out.push_back(std::stoull(s));
  }
  return out;
}

int cmd_bench(const Common& c, const std::vector<std::string>& kinds, const std::vector<std::string>& full,
              const std::vector<std::string>& dims, std::size_t reps, std::size_t warmups, bool plot) {
  const fs::path dir = out_dir(c);
  BenchOptions opt;
  opt.repetitions = reps;
  opt.warmups = warmups;
  opt.threads = c.threads;
  opt.seed = c.seed.value_or(0);
  std::vector<BenchRecord> records;
  for (const auto& k : kinds) {
    const auto kind = parse_projection_kind(k);
    for (auto D : parse_sizes(full)) {
      for (auto d : parse_sizes(dims)) {
        if (d > D) continue;
        try {
          records.push_back(bench_apply(kind, D, d, opt));
        } catch (const std::bad_alloc&) {
          std::cerr << "skipping " << k << " D=" << D << " d=" << d << ": allocation failed\n";
          continue;
        } catch (const std::length_error& e) {
          std::cerr << "skipping " << k << " D=" << D << " d=" << d << ": " << e.what() << '\n';
          continue;
        }
        const auto& r = records.back();
        std::cout << std::left << std::setw(10) << k << " D=" << std::setw(9) << D << " d=" << std::setw(7) << d
                  << " median " << std::scientific << std::setprecision(3) << r.time.median << " s  p10 "
                  << r.time.p10 << "  p90 " << r.time.p90 << "  build " << r.construction_seconds << " s\n"
                  << std::defaultfloat;
      }
    }
  }
  std::ofstream csv(dir / "bench.csv");
  write_bench_csv(csv, records);
  std::cout << "wrote " << (dir / "bench.csv").string() << '\n';
  if (plot && !records.empty()) {
    write_bench_svg(dir / "bench.svg", records);
    std::cout << "wrote " << (dir / "bench.svg").string() << '\n';
  }
  return 0;
}

int cmd_ablate(const Common& c, const std::vector<std::string>& variant_names, std::size_t trials) {
  const RunConfig rc = resolve_config(c);
  const fs::path dir = out_dir(c);
  std::vector<AblationVariant> variants;
  for (const auto& v : variant_names) variants.push_back({v, parse_projection_kind(v), 0});
  const auto table = run_ablation(rc, variants, trials);

  std::ofstream csv(dir / "ablation.csv");
  csv.precision(9);
  csv << "variant,kind,d,trials,median,stddev,min,max\n";
  std::cout << "final eval " << table.metric << " over " << trials << " seeds\n"
            << std::left << std::setw(20) << "variant" << std::setw(8) << "d" << "median +/- std  [min, max]\n";
  for (const auto& r : table.rows) {
    csv << r.label << ',' << to_string(r.kind) << ',' << r.d << ',' << trials << ',' << r.median << ','
        << r.stddev << ',' << r.min << ',' << r.max << '\n';
    std::cout << std::setw(20) << r.label << std::setw(8) << r.d << std::scientific << std::setprecision(3)
              << r.median << " +/- " << r.stddev << "  [" << r.min << ", " << r.max << "]\n"
              << std::defaultfloat;
  }
  std::cout << "wrote " << (dir / "ablation.csv").string() << '\n';
  return 0;
}

int cmd_export(const Common& c, const std::string& checkpoint_arg) {
  const RunConfig rc = resolve_config(c);
  const fs::path dir = out_dir(c);
  const fs::path ckpt = checkpoint_arg.empty() ? dir / "checkpoint.slr" : fs::path(checkpoint_arg);
  const auto layout = model_layout(rc.model);
  const auto loaded = load_checkpoint(ckpt, layout);
  auto model = make_model<float>(rc.model, run_seeds(rc.seed).model);
  const fs::path path = dir / "merged.bin";
  export_merged(path, layout, *loaded.projection, loaded.checkpoint.theta_d,
                [&](std::string_view name) { return model->base_weight(name); }, rc.model.scaling);
  std::cout << "wrote " << layout.size() << " merged sections to " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sublora: subspace low-rank adaptation toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint;
  std::size_t full_dim = 0;
  std::size_t samples = 256;
  double tol = 0.0;
  std::vector<std::string> kinds = {"onehot", "fastfood"};
  std::vector<std::string> bench_full = {"2^22"};
  std::vector<std::string> bench_dims = {"2^8", "2^10", "2^12", "2^14", "2^16"};
  std::size_t reps = 9;
  std::size_t warmups = 3;
  bool plot = false;
  std::vector<std::string> variants = {"identity", "onehot", "nonuniform-onehot", "local-onehot", "fastfood"};
  std::size_t trials = 5;

  auto* train_cmd = app.add_subcommand("train", "Train theta_d and write metrics plus a checkpoint");
  add_common(train_cmd, common);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out split");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint path (default: <out>/checkpoint.slr)");

  auto* verify_cmd = app.add_subcommand("verify", "Check orthonormality, isometry, adjoint and left inverse");
  add_common(verify_cmd, common);
  verify_cmd->add_option("--full-dim", full_dim, "D for a layout-free check");
  verify_cmd->add_option("--samples", samples, "Random pairs for the isometry check");
  verify_cmd->add_option("--tol", tol, "Tolerance (default 1e-12 for f64, 1e-5 for f32)");

  auto* bench_cmd = app.add_subcommand("bench", "Time projection apply across a size grid");
  add_common(bench_cmd, common, false);
  bench_cmd->add_option("--kinds", kinds, "Projection kinds")->delimiter(',');
  bench_cmd->add_option("--full-dims", bench_full, "Values of D (n or 2^k)")->delimiter(',');
  bench_cmd->add_option("--dims", bench_dims, "Values of d (n or 2^k)")->delimiter(',');
  bench_cmd->add_option("--reps", reps, "Timed repetitions")->check(CLI::Range(5, 100000));
  bench_cmd->add_option("--warmups", warmups, "Untimed warmup runs");
  bench_cmd->add_flag("--plot", plot, "Also write bench.svg");

  auto* ablate_cmd = app.add_subcommand("ablate", "Compare projection variants over several seeds");
  add_common(ablate_cmd, common);
  ablate_cmd->add_option("--variants", variants, "Projection kinds to compare")->delimiter(',');
  ablate_cmd->add_option("--trials", trials, "Seeds per variant")->check(CLI::PositiveNumber);

  auto* export_cmd = app.add_subcommand("export", "Write merged W + dW matrices from a checkpoint");
  add_common(export_cmd, common);
  export_cmd->add_option("--checkpoint", checkpoint, "Checkpoint path (default: <out>/checkpoint.slr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(common);
    if (*eval_cmd) return cmd_eval(common, checkpoint);
    if (*verify_cmd) return cmd_verify(common, full_dim, samples, tol);
    if (*bench_cmd) return cmd_bench(common, kinds, bench_full, bench_dims, reps, warmups, plot);
    if (*ablate_cmd) return cmd_ablate(common, variants, trials);
    if (*export_cmd) return cmd_export(common, checkpoint);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
