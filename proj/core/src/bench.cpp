// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sublora/alloc_tracker.hpp"
#include "sublora/dense.hpp"
#include "sublora/fastfood.hpp"
#include "sublora/onehot.hpp"
#include "sublora/philox.hpp"

namespace sublora {
namespace {

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::unique_ptr<SubspaceMap> build_for_bench(ProjectionKind kind, std::size_t D, std::size_t d,
                                             std::uint64_t seed) {
  switch (kind) {
    case ProjectionKind::onehot:
      return std::make_unique<OneHotProjection>(OneHotProjection::build(D, d, seed));
    case ProjectionKind::fastfood:
      return std::make_unique<FastfoodProjection>(FastfoodProjection::build(D, d, seed));
    case ProjectionKind::dense:
      return std::make_unique<DenseProjection>(DenseProjection::gaussian(D, d, seed));
    default:
      throw std::invalid_argument("bench supports onehot, fastfood and dense");
  }
}

}  // namespace

TimingStats summarize_times(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("no timing samples");
  std::sort(samples.begin(), samples.end());
  TimingStats s;
  s.repetitions = samples.size();
  s.median = percentile(samples, 0.5);
  s.p10 = percentile(samples, 0.1);
  s.p90 = percentile(samples, 0.9);
  return s;
}

TimingStats time_repeated(const std::function<void()>& fn, std::size_t warmups,
                          std::size_t repetitions) {
  for (std::size_t i = 0; i < warmups; ++i) fn();
  std::vector<double> samples;
  samples.reserve(repetitions);
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return summarize_times(std::move(samples));
}

BenchRecord bench_apply(ProjectionKind kind, std::size_t D, std::size_t d,
                        const BenchOptions& options) {
  if (options.repetitions < 5) throw std::invalid_argument("bench needs at least 5 repetitions");
  BenchRecord rec;
  rec.kind = kind;
  rec.D = D;
  rec.d = d;
  rec.threads = options.threads;

  const auto t0 = std::chrono::steady_clock::now();
  auto map = build_for_bench(kind, D, d, options.seed);
  rec.construction_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  map->set_threads(options.threads);

  RngStream rng(derive_seed(options.seed, 0xBE), Stream::theta_init);
  std::vector<float> theta_d(d);
  for (auto& t : theta_d) t = static_cast<float>(rng.uniform(-1.0, 1.0));
  std::vector<float> theta_D(D);

  alloc::PeakScope scope;
  rec.time = time_repeated([&] { map->apply(std::span<const float>(theta_d), std::span<float>(theta_D)); },
                           options.warmups, options.repetitions);
  rec.peak_aux_bytes = scope.peak();
  rec.throughput = rec.time.median > 0 ? static_cast<double>(D) / rec.time.median : 0.0;
  return rec;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "kind,D,d,threads,repetitions,median_s,p10_s,p90_s,throughput_coords_per_s,"
         "peak_aux_bytes,construction_s\n";
  out.precision(9);
  for (const auto& r : records)
    out << to_string(r.kind) << ',' << r.D << ',' << r.d << ',' << r.threads << ','
        << r.time.repetitions << ',' << r.time.median << ',' << r.time.p10 << ',' << r.time.p90
        << ',' << r.throughput << ',' << r.peak_aux_bytes << ',' << r.construction_seconds << '\n';
}

void write_bench_svg(const std::filesystem::path& path, std::span<const BenchRecord> records) {
  if (records.empty()) throw std::invalid_argument("nothing to plot");
  constexpr double W = 640, H = 400, L = 70, R = 160, T = 30, B = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : records) {
    const double x = std::log2(static_cast<double>(r.d));
    const double y = std::log10(std::max(r.time.median, 1e-9));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1;
  ymin = std::floor(ymin);
  ymax = std::max(std::ceil(ymax), ymin + 1);
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::map<std::string, std::vector<const BenchRecord*>> series;
  for (const auto& r : records)
    series[std::string(to_string(r.kind)) + " D=" + std::to_string(r.D)].push_back(&r);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e)
    out << "<text x=\"" << L - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e
        << " s</text>\n";
  for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(xmax); ++e)
    out << "<text x=\"" << px(e) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">2^" << e
        << "</text>\n";
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\">subspace dimension d</text>\n";
  const char* colors[] = {"#1b6ca8", "#d1495b", "#2a9d8f", "#e9a03b", "#6a4c93", "#444444"};
  std::size_t i = 0;
  for (auto& [label, points] : series) {
    std::sort(points.begin(), points.end(), [](auto* a, auto* b) { return a->d < b->d; });
    const char* color = colors[i % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto* p : points)
      out << px(std::log2(static_cast<double>(p->d))) << ','
          << py(std::log10(std::max(p->time.median, 1e-9))) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 18 * static_cast<double>(i) + 10
        << "\" fill=\"" << color << "\">" << label << "</text>\n";
    ++i;
  }
  out << "</svg>\n";
}

}  // namespace sublora
