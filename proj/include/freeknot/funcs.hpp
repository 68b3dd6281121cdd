#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "freeknot/error.hpp"

namespace freeknot {

/// Sample abscissae t_1 < ... < t_N over [c, d] with nominal step h.
struct Grid {
  double c = 0.0;
  double d = 0.0;
  double h = 0.0;
  std::vector<double> points;

  std::size_t size() const noexcept { return points.size(); }
};

/// Uniform grid over [c, d]. The last point is always exactly d; when (d - c) / h
/// is not integral the final step absorbs the remainder.
inline Grid make_grid(double c, double d, double h) {
  if (!std::isfinite(c) || !std::isfinite(d) || !std::isfinite(h))
    throw InvalidArgument("make_grid: bounds and step must be finite");
  if (!(c < d)) throw InvalidArgument("make_grid: require c < d");
  if (!(h > 0.0)) throw InvalidArgument("make_grid: require h > 0");
  const double span = d - c;
  if (h > span * (1.0 + 1e-12)) throw InvalidArgument("make_grid: require h <= d - c");

  const double ratio = span / h;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  const bool even = std::abs(ratio - static_cast<double>(steps)) <= 1e-9 * std::max(1.0, ratio);

  Grid g{c, d, h, {}};
  g.points.resize(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) {
    // Divide the span when the step divides it evenly so that round abscissae
    // such as 0.25 are hit exactly.
    g.points[j] = even ? c + span * static_cast<double>(j) / static_cast<double>(steps)
                       : c + static_cast<double>(j) * h;
  }
  g.points.front() = c;
  g.points.back() = d;
  return g;
}

/// Grid over arbitrary strictly increasing abscissae (imported data). The
/// nominal step is the mean spacing; uniformity is not required.
inline Grid grid_from_points(std::vector<double> points) {
  if (points.empty()) throw InvalidArgument("grid_from_points: no points");
  for (double t : points)
    if (!std::isfinite(t)) throw InvalidArgument("grid_from_points: non-finite abscissa");
  for (std::size_t j = 1; j < points.size(); ++j)
    if (!(points[j] > points[j - 1]))
      throw InvalidArgument("grid_from_points: abscissae must be strictly increasing");
  Grid g;
  g.c = points.front();
  g.d = points.back();
  g.h = points.size() > 1 ? (g.d - g.c) / static_cast<double>(points.size() - 1) : 0.0;
  g.points = std::move(points);
  return g;
}

enum class BenchmarkId { F1, F2, F3, F4, F5 };

inline constexpr BenchmarkId kAllBenchmarks[] = {BenchmarkId::F1, BenchmarkId::F2, BenchmarkId::F3,
                                                 BenchmarkId::F4, BenchmarkId::F5};

inline std::string_view to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::F1: return "f1";
    case BenchmarkId::F2: return "f2";
    case BenchmarkId::F3: return "f3";
    case BenchmarkId::F4: return "f4";
    case BenchmarkId::F5: return "f5";
  }
  return "?";
}

inline BenchmarkId parse_benchmark(std::string_view name) {
  for (auto id : kAllBenchmarks)
    if (to_string(id) == name) return id;
  throw InvalidArgument("unknown benchmark function '" + std::string(name) + "'");
}

inline double benchmark_value(BenchmarkId id, double t) {
  switch (id) {
    case BenchmarkId::F1: return std::sqrt(std::abs(t));
    case BenchmarkId::F2: return std::sqrt(std::abs(t - 0.75));
    case BenchmarkId::F3: return std::sin(2.0 * std::numbers::pi * t);
    case BenchmarkId::F4: return t * t * t - 3.0 * t * t + 2.0;
    case BenchmarkId::F5: return 1.0 / (std::pow(t, 25) + 0.5);
  }
  return 0.0;
}

/// Function values on a grid; the data of the discretized approximation problem.
struct SampledFunction {
  Grid grid;
  std::vector<double> values;
  std::string label;

  std::size_t size() const noexcept { return values.size(); }
  double t(std::size_t j) const { return grid.points[j]; }
  double f(std::size_t j) const { return values[j]; }
};

template <class Evaluator>
SampledFunction sample(Evaluator&& eval, const Grid& grid, std::string label = "custom") {
  SampledFunction s{grid, {}, std::move(label)};
  s.values.reserve(grid.size());
  for (double t : grid.points) {
    const double v = eval(t);
    if (!std::isfinite(v))
      throw InvalidArgument("sample: non-finite value at t = " + std::to_string(t));
    s.values.push_back(v);
  }
  return s;
}

inline SampledFunction sample(BenchmarkId id, const Grid& grid) {
  return sample([id](double t) { return benchmark_value(id, t); }, grid, std::string(to_string(id)));
}

inline SampledFunction make_sampled(std::vector<double> t, std::vector<double> f, std::string label) {
  if (t.size() != f.size()) throw InvalidArgument("make_sampled: length mismatch");
  for (double v : f)
    if (!std::isfinite(v)) throw InvalidArgument("make_sampled: non-finite value");
  return SampledFunction{grid_from_points(std::move(t)), std::move(f), std::move(label)};
}

inline std::pair<double, double> value_range(const SampledFunction& s) {
  double lo = s.values.front(), hi = s.values.front();
  for (double v : s.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace freeknot
