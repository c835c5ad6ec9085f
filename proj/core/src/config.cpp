// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sublora {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("'" + std::string(v) + "' is not a valid number");
  return out;
}

double parse_real(std::string_view v) {
  // from_chars for floating point is missing from older standard libraries.
  std::string s(v);
  std::size_t used = 0;
  const double out = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("'" + s + "' is not a valid number");
  return out;
}

Schedule parse_schedule(std::string_view v) {
  if (v == "constant") return Schedule::constant;
  if (v == "linear") return Schedule::linear;
  if (v == "cosine") return Schedule::cosine;
  throw std::invalid_argument("unknown schedule '" + std::string(v) + "'");
}

std::string_view to_string(Schedule s) {
  return s == Schedule::constant ? "constant" : s == Schedule::linear ? "linear" : "cosine";
}

Precision parse_precision(std::string_view v) {
  if (v == "f32" || v == "single") return Precision::f32;
  if (v == "f64" || v == "double") return Precision::f64;
  throw std::invalid_argument("unknown precision '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"architecture", [](RunConfig& c, auto v) { c.model.architecture = parse_architecture(v); }},
      {"task", [](RunConfig& c, auto v) { c.model.task = parse_task_kind(v); }},
      {"depth", [](RunConfig& c, auto v) { c.model.depth = parse_number<std::size_t>(v); }},
      {"width", [](RunConfig& c, auto v) { c.model.width = parse_number<std::size_t>(v); }},
      {"heads", [](RunConfig& c, auto v) { c.model.heads = parse_number<std::size_t>(v); }},
      {"input_dim", [](RunConfig& c, auto v) { c.model.input_dim = parse_number<std::size_t>(v); }},
      {"output_dim", [](RunConfig& c, auto v) { c.model.output_dim = parse_number<std::size_t>(v); }},
      {"rank", [](RunConfig& c, auto v) { c.model.rank = parse_number<std::size_t>(v); }},
      {"vocab", [](RunConfig& c, auto v) { c.model.vocab = parse_number<std::size_t>(v); }},
      {"seq_len", [](RunConfig& c, auto v) { c.model.seq_len = parse_number<std::size_t>(v); }},
      {"adapted", [](RunConfig& c, auto v) { c.model.adapted = std::string(v); }},
      {"scaling", [](RunConfig& c, auto v) { c.model.scaling = parse_real(v); }},
      {"precision", [](RunConfig& c, auto v) { c.model.precision = parse_precision(v); }},
      {"lr", [](RunConfig& c, auto v) { c.optimizer.lr = parse_real(v); }},
      {"beta1", [](RunConfig& c, auto v) { c.optimizer.beta1 = parse_real(v); }},
      {"beta2", [](RunConfig& c, auto v) { c.optimizer.beta2 = parse_real(v); }},
      {"eps", [](RunConfig& c, auto v) { c.optimizer.eps = parse_real(v); }},
      {"weight_decay", [](RunConfig& c, auto v) { c.optimizer.weight_decay = parse_real(v); }},
      {"warmup_ratio", [](RunConfig& c, auto v) { c.optimizer.warmup_ratio = parse_real(v); }},
      {"schedule", [](RunConfig& c, auto v) { c.optimizer.schedule = parse_schedule(v); }},
      {"head_lr", [](RunConfig& c, auto v) { c.head_lr = parse_real(v); }},
      {"steps", [](RunConfig& c, auto v) { c.steps = parse_number<std::size_t>(v); }},
      {"batch_size", [](RunConfig& c, auto v) { c.batch_size = parse_number<std::size_t>(v); }},
      {"init_range", [](RunConfig& c, auto v) { c.init_range = parse_real(v); }},
      {"projection", [](RunConfig& c, auto v) { c.projection = parse_projection_kind(v); }},
      {"d", [](RunConfig& c, auto v) { c.d = parse_number<std::size_t>(v); }},
      {"seed", [](RunConfig& c, auto v) { c.seed = parse_number<std::uint64_t>(v); }},
      {"n_train", [](RunConfig& c, auto v) { c.n_train = parse_number<std::size_t>(v); }},
      {"n_eval", [](RunConfig& c, auto v) { c.n_eval = parse_number<std::size_t>(v); }},
      {"plant", [](RunConfig& c, auto v) { c.plant = parse_plant_mode(v); }},
      {"d_star", [](RunConfig& c, auto v) { c.d_star = parse_number<std::size_t>(v); }},
      {"planted_scale", [](RunConfig& c, auto v) { c.planted_scale = parse_real(v); }},
      {"separation", [](RunConfig& c, auto v) { c.separation = parse_real(v); }},
      {"threads", [](RunConfig& c, auto v) { c.threads = parse_number<unsigned>(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (eq == line.npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    try {
      if (key == "corpus_file") {
        const auto path = base_dir / std::filesystem::path(std::string(value));
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::invalid_argument("cannot read corpus '" + path.string() + "'");
        config.corpus.assign(std::istreambuf_iterator<char>(in), {});
        continue;
      }
      const auto it = setters().find(key);
      if (it == setters().end()) throw std::invalid_argument("unknown key '" + std::string(key) + "'");
      it->second(config, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(where + e.what());
    }
  }
  try {
    validate(config.model);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "architecture = " << to_string(c.model.architecture) << '\n'
     << "task = " << to_string(c.model.task) << '\n'
     << "depth = " << c.model.depth << '\n'
     << "width = " << c.model.width << '\n'
     << "heads = " << c.model.heads << '\n'
     << "input_dim = " << c.model.input_dim << '\n'
     << "output_dim = " << c.model.output_dim << '\n'
     << "rank = " << c.model.rank << '\n'
     << "vocab = " << c.model.vocab << '\n'
     << "seq_len = " << c.model.seq_len << '\n'
     << "adapted = " << c.model.adapted << '\n'
     << "scaling = " << c.model.scaling << '\n'
     << "precision = " << (c.model.precision == Precision::f64 ? "f64" : "f32") << '\n'
     << "lr = " << c.optimizer.lr << '\n'
     << "beta1 = " << c.optimizer.beta1 << '\n'
     << "beta2 = " << c.optimizer.beta2 << '\n'
     << "eps = " << c.optimizer.eps << '\n'
     << "weight_decay = " << c.optimizer.weight_decay << '\n'
     << "warmup_ratio = " << c.optimizer.warmup_ratio << '\n'
     << "schedule = " << to_string(c.optimizer.schedule) << '\n'
     << "head_lr = " << c.head_lr << '\n'
     << "steps = " << c.steps << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "init_range = " << c.init_range << '\n'
     << "projection = " << to_string(c.projection) << '\n'
     << "d = " << c.d << '\n'
     << "seed = " << c.seed << '\n'
     << "n_train = " << c.n_train << '\n'
     << "n_eval = " << c.n_eval << '\n'
     << "plant = " << to_string(c.plant) << '\n'
     << "d_star = " << c.d_star << '\n'
     << "planted_scale = " << c.planted_scale << '\n'
     << "separation = " << c.separation << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace sublora
