#pragma once

// The two big-M mixed-integer programs for one-knot Chebyshev fitting.
//
// Max problem (spline = max of two lines), per point i:
//   f_i - c_i <= z,  c_i - f_i <= z,
//   a1 t_i + b1 <= c_i,  a2 t_i + b2 <= c_i,
//   c_i - (a1 t_i + b1) <= M z_i,  c_i - (a2 t_i + b2) <= M (1 - z_i),  z_i binary.
// Min problem mirrors it with d_i <= both lines and
//   a1 t_i + b1 - d_i <= M (1 - y_i),  a2 t_i + b2 - d_i <= M y_i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "freeknot/error.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/lp.hpp"
#include "freeknot/spline.hpp"

namespace freeknot {

enum class ProblemKind { MaxProblem, MinProblem };

inline const char* to_string(ProblemKind k) { return k == ProblemKind::MaxProblem ? "max" : "min"; }

/// Column of each role in a MilpModel.
struct VarIndex {
  std::size_t a1 = 0, b1 = 1, a2 = 2, b2 = 3, objective = 4;
  std::size_t first_aux = 5;     // c_i (max) or d_i (min)
  std::size_t first_binary = 0;  // z_i (max) or y_i (min)

  std::size_t aux(std::size_t i) const noexcept { return first_aux + i; }
  std::size_t binary(std::size_t i) const noexcept { return first_binary + i; }
};

/// Box |slope| <= 40 range(f) / (d - c), |intercept| <= 10 (max|f| + slope bound max|t|)
/// on the line coefficients; keeps every relaxation bounded.
struct CoefficientBox {
  double slope = 1.0;
  double intercept = 1.0;
};

inline CoefficientBox coefficient_box(const SampledFunction& data) {
  const auto [lo, hi] = value_range(data);
  const double span = data.grid.d - data.grid.c;
  const double range = hi - lo;
  const double slope = 4.0 * range / span * 10.0;
  double max_abs_f = 0.0, max_abs_t = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    max_abs_f = std::max(max_abs_f, std::abs(data.f(j)));
    max_abs_t = std::max(max_abs_t, std::abs(data.t(j)));
  }
  return {slope, 10.0 * (max_abs_f + slope * max_abs_t)};
}

/// Big-M heuristic 10 ((max f - min f) + S (d - c)) with S = 4 (max f - min f) / (d - c),
/// floored at 1.
inline double default_big_m(const SampledFunction& data) {
  if (data.size() == 0) throw InvalidArgument("default_big_m: empty data");
  const auto [lo, hi] = value_range(data);
  const double range = hi - lo;
  const double span = data.grid.d - data.grid.c;
  const double slope = span > 0.0 ? 4.0 * range / span : 0.0;
  return std::max(1.0, 10.0 * (range + slope * span));
}

struct MilpModel {
  ProblemKind kind = ProblemKind::MaxProblem;
  double big_m = 0.0;
  std::size_t num_continuous = 0;
  std::size_t num_binary = 0;
  std::vector<double> objective;  // minimize, one entry per column
  std::vector<LpRow> constraints;
  std::vector<double> lower, upper;
  std::vector<std::string> var_names;
  VarIndex var_index;
  CoefficientBox box;
  // Problem data, kept so that solvers can specialise on the model shape.
  std::vector<double> abscissae;
  std::vector<double> values;
  double c = 0.0, d = 0.0;

  std::size_t num_points() const noexcept { return abscissae.size(); }
  std::size_t num_columns() const noexcept { return num_continuous + num_binary; }
  bool is_binary(std::size_t col) const noexcept { return col >= var_index.first_binary; }

  /// LP relaxation: the same rows with binaries relaxed to [0, 1].
  LpProblem relaxation() const {
    LpProblem p;
    p.objective = objective;
    p.rows = constraints;
    p.lower = lower;
    p.upper = upper;
    return p;
  }
};

namespace detail {

inline MilpModel build_model(const SampledFunction& data, double big_m, ProblemKind kind) {
  if (!(big_m > 0.0) || !std::isfinite(big_m)) throw InvalidArgument("build model: big-M must be positive and finite");
  if (data.size() == 0) throw InvalidArgument("build model: no data points");
  const std::size_t n = data.size();

  MilpModel m;
  m.kind = kind;
  m.big_m = big_m;
  m.num_continuous = n + 5;
  m.num_binary = n;
  m.var_index.first_binary = n + 5;
  m.box = coefficient_box(data);
  m.abscissae = data.grid.points;
  m.values = data.values;
  m.c = data.grid.c;
  m.d = data.grid.d;

  const bool is_max = kind == ProblemKind::MaxProblem;
  const std::string aux = is_max ? "c" : "d";
  const std::string bin = is_max ? "z" : "y";
  const std::size_t cols = m.num_columns();
  m.objective.assign(cols, 0.0);
  m.lower.assign(cols, -kInf);
  m.upper.assign(cols, kInf);
  m.var_names.resize(cols);

  const VarIndex& v = m.var_index;
  m.var_names[v.a1] = "a1";
  m.var_names[v.b1] = "b1";
  m.var_names[v.a2] = "a2";
  m.var_names[v.b2] = "b2";
  m.var_names[v.objective] = is_max ? "z" : "y";
  m.objective[v.objective] = 1.0;
  m.lower[v.objective] = 0.0;
  for (std::size_t col : {v.a1, v.a2}) {
    m.lower[col] = -m.box.slope;
    m.upper[col] = m.box.slope;
  }
  for (std::size_t col : {v.b1, v.b2}) {
    m.lower[col] = -m.box.intercept;
    m.upper[col] = m.box.intercept;
  }
  for (std::size_t i = 0; i < n; ++i) {
    m.var_names[v.aux(i)] = aux + std::to_string(i + 1);
    m.var_names[v.binary(i)] = bin + std::to_string(i + 1);
    m.lower[v.binary(i)] = 0.0;
    m.upper[v.binary(i)] = 1.0;
  }

  m.constraints.reserve(6 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = data.t(i);
    const double f = data.f(i);
    const std::size_t ci = v.aux(i);
    const std::size_t bi = v.binary(i);
    // f - c <= z  and  c - f <= z
    m.constraints.push_back({{{ci, -1.0}, {v.objective, -1.0}}, Relation::LessEqual, -f});
    m.constraints.push_back({{{ci, 1.0}, {v.objective, -1.0}}, Relation::LessEqual, f});
    if (is_max) {
      // a t + b <= c
      m.constraints.push_back({{{v.a1, t}, {v.b1, 1.0}, {ci, -1.0}}, Relation::LessEqual, 0.0});
      m.constraints.push_back({{{v.a2, t}, {v.b2, 1.0}, {ci, -1.0}}, Relation::LessEqual, 0.0});
      // c - (a1 t + b1) <= M z ;  c - (a2 t + b2) <= M (1 - z)
      m.constraints.push_back({{{ci, 1.0}, {v.a1, -t}, {v.b1, -1.0}, {bi, -big_m}}, Relation::LessEqual, 0.0});
      m.constraints.push_back({{{ci, 1.0}, {v.a2, -t}, {v.b2, -1.0}, {bi, big_m}}, Relation::LessEqual, big_m});
    } else {
      // a t + b >= d
      m.constraints.push_back({{{v.a1, t}, {v.b1, 1.0}, {ci, -1.0}}, Relation::GreaterEqual, 0.0});
      m.constraints.push_back({{{v.a2, t}, {v.b2, 1.0}, {ci, -1.0}}, Relation::GreaterEqual, 0.0});
      // a1 t + b1 - d <= M (1 - y) ;  a2 t + b2 - d <= M y
      m.constraints.push_back({{{v.a1, t}, {v.b1, 1.0}, {ci, -1.0}, {bi, big_m}}, Relation::LessEqual, big_m});
      m.constraints.push_back({{{v.a2, t}, {v.b2, 1.0}, {ci, -1.0}, {bi, -big_m}}, Relation::LessEqual, 0.0});
    }
  }
  return m;
}

}  // namespace detail

inline MilpModel build_max_model(const SampledFunction& data, double big_m) {
  return detail::build_model(data, big_m, ProblemKind::MaxProblem);
}

inline MilpModel build_min_model(const SampledFunction& data, double big_m) {
  return detail::build_model(data, big_m, ProblemKind::MinProblem);
}

enum class MilpStatus { Optimal, Infeasible, NodeLimit, TimeLimit };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::NodeLimit: return "node_limit";
    case MilpStatus::TimeLimit: return "time_limit";
  }
  return "?";
}

struct MilpSolution {
  double objective_value = kInf;
  std::vector<double> continuous_values;
  std::vector<int> binary_values;
  MilpStatus status = MilpStatus::Infeasible;
  double gap = kInf;
  std::size_t nodes = 0;
  std::size_t lp_pivots = 0;
};

/// Largest violation of the model's rows and bounds at a full assignment.
inline double model_violation(const MilpModel& model, const MilpSolution& sol) {
  std::vector<double> x = sol.continuous_values;
  for (int b : sol.binary_values) x.push_back(static_cast<double>(b));
  if (x.size() != model.num_columns()) return kInf;
  return lp_primal_residual(model.relaxation(), x);
}

/// Recovers the spline from an optimal assignment; the knot is the crossing of
/// the two lines when it lies inside (c, d).
inline OneKnotSpline solution_to_spline(const MilpModel& model, const MilpSolution& sol) {
  if (sol.status != MilpStatus::Optimal) throw InvalidArgument("solution_to_spline: solution is not optimal");
  const auto& x = sol.continuous_values;
  const VarIndex& v = model.var_index;
  const AffinePiece p1{x[v.a1], x[v.b1]};
  const AffinePiece p2{x[v.a2], x[v.b2]};
  return OneKnotSpline::combine(p1, p2,
                                model.kind == ProblemKind::MaxProblem ? SplineKind::MaxOfTwo : SplineKind::MinOfTwo,
                                model.c, model.d);
}

/// Writes the model in the CPLEX LP text format with 17 significant digits.
inline void write_lp_format(std::ostream& os, const MilpModel& model) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  auto term = [&](double coef, const std::string& name, bool first) {
    if (coef < 0.0) buf << (first ? "-" : " - ");
    else if (!first) buf << " + ";
    buf << std::abs(coef) << ' ' << name;
  };
  buf << "\\ one-knot " << to_string(model.kind) << " model, M = " << model.big_m << "\n";
  buf << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < model.num_columns(); ++j) {
    if (model.objective[j] == 0.0) continue;
    buf << ' ';
    term(model.objective[j], model.var_names[j], first);
    first = false;
  }
  buf << "\nSubject To\n";
  for (std::size_t r = 0; r < model.constraints.size(); ++r) {
    const LpRow& row = model.constraints[r];
    buf << " r" << r + 1 << ": ";
    first = true;
    for (const auto& [j, coef] : row.coefs) {
      term(coef, model.var_names[j], first);
      first = false;
    }
    const char* rel = row.relation == Relation::LessEqual ? " <= " : row.relation == Relation::Equal ? " = " : " >= ";
    buf << rel << row.rhs << "\n";
  }
  buf << "Bounds\n";
  for (std::size_t j = 0; j < model.num_continuous; ++j) {
    const double lo = model.lower[j], hi = model.upper[j];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      buf << ' ' << model.var_names[j] << " free\n";
    } else {
      buf << ' ';
      if (std::isfinite(lo)) buf << lo;
      else buf << "-inf";
      buf << " <= " << model.var_names[j] << " <= ";
      if (std::isfinite(hi)) buf << hi;
      else buf << "+inf";
      buf << '\n';
    }
  }
  buf << "Binary\n";
  for (std::size_t j = model.num_continuous; j < model.num_columns(); ++j) buf << ' ' << model.var_names[j] << '\n';
  buf << "End\n";
  os << buf.str();
}

}  // namespace freeknot
