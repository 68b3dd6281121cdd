#pragma once

// Branch and bound for the one-knot max/min models, the two-model driver and a
// crossover-enumeration oracle.
//
// Node relaxations are solved in the projected space (a1, b1, a2, b2, z): the
// per-point variables c_i and the relaxed binaries are eliminated exactly, so a
// node LP has five columns regardless of N.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "freeknot/cheb.hpp"
#include "freeknot/error.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/lp.hpp"
#include "freeknot/milp.hpp"
#include "freeknot/spline.hpp"

namespace freeknot {

enum class Branching { CrossoverDichotomy, MostFractional };

inline const char* to_string(Branching b) {
  return b == Branching::CrossoverDichotomy ? "crossover" : "most_fractional";
}

struct BnbOptions {
  double abs_gap = 1e-7;
  std::size_t node_limit = 1'000'000;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  Branching branching = Branching::CrossoverDichotomy;
  std::optional<double> M_override;

  void validate() const {
    if (!(abs_gap > 0.0) || node_limit == 0 || !(time_limit > 0.0))
      throw InvalidArgument("BnbOptions: limits and gap must be positive");
    if (M_override && (!(*M_override > 0.0) || !std::isfinite(*M_override)))
      throw InvalidArgument("BnbOptions: M_override must be positive and finite");
  }
};

/// Which line is active at a point of a node: undecided or fixed.
enum class PointState : std::uint8_t { Free, Line1, Line2 };

namespace detail {

struct Lines {
  AffinePiece l1, l2;
};

/// Exact objective of the max/min of two lines, or nullopt when some point has
/// |L1 - L2| > M (the pair is then infeasible for the model).
inline std::optional<double> evaluate_lines(const MilpModel& m, const Lines& lines) {
  double dev = 0.0;
  for (std::size_t i = 0; i < m.num_points(); ++i) {
    const double t = m.abscissae[i];
    const double v1 = lines.l1(t), v2 = lines.l2(t);
    if (std::abs(v1 - v2) > m.big_m) return std::nullopt;
    const double s = m.kind == ProblemKind::MaxProblem ? std::max(v1, v2) : std::min(v1, v2);
    dev = std::max(dev, std::abs(m.values[i] - s));
  }
  return dev;
}

/// Full MILP assignment for a pair of lines.
inline MilpSolution assignment_from_lines(const MilpModel& m, const Lines& lines, double objective) {
  const VarIndex& v = m.var_index;
  MilpSolution s;
  s.objective_value = objective;
  s.continuous_values.assign(m.num_continuous, 0.0);
  s.binary_values.assign(m.num_binary, 0);
  s.continuous_values[v.a1] = lines.l1.slope;
  s.continuous_values[v.b1] = lines.l1.intercept;
  s.continuous_values[v.a2] = lines.l2.slope;
  s.continuous_values[v.b2] = lines.l2.intercept;
  s.continuous_values[v.objective] = objective;
  const bool is_max = m.kind == ProblemKind::MaxProblem;
  for (std::size_t i = 0; i < m.num_points(); ++i) {
    const double t = m.abscissae[i];
    const double v1 = lines.l1(t), v2 = lines.l2(t);
    if (is_max) {
      s.continuous_values[v.aux(i)] = std::max(v1, v2);
      s.binary_values[i] = v1 >= v2 ? 0 : 1;
    } else {
      s.continuous_values[v.aux(i)] = std::min(v1, v2);
      s.binary_values[i] = v1 <= v2 ? 1 : 0;
    }
  }
  return s;
}

/// Linear form p L1 + q L2 + r z at abscissa t.
inline std::vector<std::pair<std::size_t, double>> form(double t, double p, double q, double r) {
  std::vector<std::pair<std::size_t, double>> out;
  if (p != 0.0) {
    out.push_back({0, p * t});
    out.push_back({1, p});
  }
  if (q != 0.0) {
    out.push_back({2, q * t});
    out.push_back({3, q});
  }
  if (r != 0.0) out.push_back({4, r});
  return out;
}

/// Projected relaxation of a node. Rows that are linear in t for a whole group
/// of points (ordering and |L1 - L2| <= M rows) are kept only at the group's
/// extreme abscissae.
inline LpProblem node_lp(const MilpModel& m, std::span<const PointState> states) {
  LpProblem lp;
  lp.add_variable(0.0, -m.box.slope, m.box.slope);
  lp.add_variable(0.0, -m.box.intercept, m.box.intercept);
  lp.add_variable(0.0, -m.box.slope, m.box.slope);
  lp.add_variable(0.0, -m.box.intercept, m.box.intercept);
  lp.add_variable(1.0, 0.0, kInf);

  const double big_m = m.big_m;
  const bool is_max = m.kind == ProblemKind::MaxProblem;
  const double inf = std::numeric_limits<double>::infinity();
  double lo[3] = {inf, inf, inf}, hi[3] = {-inf, -inf, -inf};

  for (std::size_t i = 0; i < m.num_points(); ++i) {
    const double t = m.abscissae[i];
    const double f = m.values[i];
    const auto s = static_cast<std::size_t>(states[i]);
    lo[s] = std::min(lo[s], t);
    hi[s] = std::max(hi[s], t);
    if (states[i] == PointState::Free) {
      if (is_max) {
        lp.add_row(form(t, 1, 0, -1), Relation::LessEqual, f);
        lp.add_row(form(t, 0, 1, -1), Relation::LessEqual, f);
        lp.add_row(form(t, -1, -1, -2), Relation::LessEqual, big_m - 2.0 * f);
      } else {
        lp.add_row(form(t, -1, 0, -1), Relation::LessEqual, -f);
        lp.add_row(form(t, 0, -1, -1), Relation::LessEqual, -f);
        lp.add_row(form(t, 1, 1, -2), Relation::LessEqual, big_m + 2.0 * f);
      }
    } else {
      const double p = states[i] == PointState::Line1 ? 1.0 : 0.0;
      lp.add_row(form(t, -p, -(1 - p), -1), Relation::LessEqual, -f);
      lp.add_row(form(t, p, 1 - p, -1), Relation::LessEqual, f);
    }
  }

  for (std::size_t s = 0; s < 3; ++s) {
    if (lo[s] > hi[s]) continue;
    for (double t : {lo[s], hi[s]}) {
      if (s == static_cast<std::size_t>(PointState::Free)) {
        lp.add_row(form(t, 1, -1, 0), Relation::LessEqual, big_m);
        lp.add_row(form(t, -1, 1, 0), Relation::LessEqual, big_m);
      } else {
        // Active line A minus other line O: >= 0 and <= M for max, the mirror for min.
        const double sign = s == static_cast<std::size_t>(PointState::Line1) ? 1.0 : -1.0;
        const double dir = is_max ? 1.0 : -1.0;
        lp.add_row(form(t, -dir * sign, dir * sign, 0), Relation::LessEqual, 0.0);
        lp.add_row(form(t, dir * sign, -dir * sign, 0), Relation::LessEqual, big_m);
      }
      if (lo[s] == hi[s]) break;
    }
  }
  return lp;
}

/// For a free point of a node LP solution: how far each integral choice is from
/// feasible, as min(lower end, 1 - upper end) of the admissible relaxed-binary
/// interval in "line 2 active" units. Positive means fractional.
inline double fractionality(const MilpModel& m, std::size_t i, const Lines& lines, double z) {
  const double t = m.abscissae[i];
  const double f = m.values[i];
  const double v1 = lines.l1(t), v2 = lines.l2(t);
  if (m.kind == ProblemKind::MaxProblem) {
    const double c = std::max({v1, v2, f - z});
    return std::min((c - v1) / m.big_m, (c - v2) / m.big_m);
  }
  const double d = std::min({v1, v2, f + z});
  return std::min((v1 - d) / m.big_m, (v2 - d) / m.big_m);
}

}  // namespace detail

/// Branch and bound with best-bound node selection (deeper first on ties).
/// Incumbents are evaluated exactly from the lines of each node's LP optimum.
inline MilpSolution solve_milp(const MilpModel& model, const BnbOptions& opts = {},
                               std::vector<double>* incumbent_trace = nullptr) {
  opts.validate();
  const std::size_t n = model.num_points();
  if (n == 0) throw InvalidArgument("solve_milp: empty model");
  const auto start = std::chrono::steady_clock::now();

  struct Node {
    double bound;
    std::size_t depth;
    std::size_t seq;
    int orientation;           // crossover branching: 0 = line 1 first, 1 = line 2 first
    std::size_t lo, hi;        // crossover index range
    std::vector<PointState> states;  // most-fractional branching
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  std::size_t seq = 0;

  const bool crossover = opts.branching == Branching::CrossoverDichotomy;
  if (crossover) {
    open.push({-kInf, 0, seq++, 0, 0, n, {}});
    open.push({-kInf, 0, seq++, 1, 0, n, {}});
  } else {
    open.push({-kInf, 0, seq++, 0, 0, 0, std::vector<PointState>(n, PointState::Free)});
  }

  MilpSolution best;
  best.objective_value = kInf;
  std::optional<detail::Lines> best_lines;
  double proved = kInf;  // smallest bound among nodes fathomed by bound
  std::vector<PointState> states(n);
  MilpStatus status = MilpStatus::Optimal;

  auto consider = [&](const detail::Lines& lines) {
    const auto dev = detail::evaluate_lines(model, lines);
    if (dev && *dev < best.objective_value) {
      best.objective_value = *dev;
      best_lines = lines;
      if (incumbent_trace) incumbent_trace->push_back(*dev);
    }
  };

  while (!open.empty()) {
    if (best.nodes >= opts.node_limit) {
      status = MilpStatus::NodeLimit;
      break;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    if (elapsed.count() > opts.time_limit) {
      status = MilpStatus::TimeLimit;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= best.objective_value - opts.abs_gap) {
      proved = std::min(proved, node.bound);
      continue;
    }

    if (crossover) {
      const PointState first = node.orientation == 0 ? PointState::Line1 : PointState::Line2;
      const PointState second = node.orientation == 0 ? PointState::Line2 : PointState::Line1;
      for (std::size_t i = 0; i < n; ++i)
        states[i] = i < node.lo ? first : (i >= node.hi ? second : PointState::Free);
    } else {
      states = node.states;
    }

    const LpProblem lp = detail::node_lp(model, states);
    const LpSolution sol = lp_solve_dual(lp);
    ++best.nodes;
    best.lp_pivots += sol.pivots;
    if (sol.status == LpStatus::Infeasible) continue;
    if (sol.status != LpStatus::Optimal) throw NumericError("solve_milp: node LP failed");

    const detail::Lines lines{{sol.x[0], sol.x[1]}, {sol.x[2], sol.x[3]}};
    consider(lines);
    const double bound = std::max(node.bound, sol.objective_value);
    if (bound >= best.objective_value - opts.abs_gap) {
      proved = std::min(proved, bound);
      continue;
    }

    if (crossover) {
      if (node.lo == node.hi) {
        // Leaf: the LP optimum is exact for this pattern and was offered as incumbent.
        proved = std::min(proved, bound);
        continue;
      }
      const std::size_t mid = node.lo + (node.hi - node.lo) / 2;
      open.push({bound, node.depth + 1, seq++, node.orientation, node.lo, mid, {}});
      open.push({bound, node.depth + 1, seq++, node.orientation, mid + 1, node.hi, {}});
    } else {
      std::optional<std::size_t> pick;
      double score = -kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (states[i] != PointState::Free) continue;
        const double s = detail::fractionality(model, i, lines, sol.x[4]);
        if (s > score) {
          score = s;
          pick = i;
        }
      }
      if (!pick) {
        proved = std::min(proved, bound);
        continue;
      }
      for (PointState choice : {PointState::Line1, PointState::Line2}) {
        std::vector<PointState> child = states;
        child[*pick] = choice;
        open.push({bound, node.depth + 1, seq++, 0, 0, 0, std::move(child)});
      }
    }
  }

  if (!best_lines) {
    if (status != MilpStatus::Optimal) {
      best.status = status;
      return best;
    }
    throw InternalError("solve_milp: no feasible assignment found; the model should always be feasible");
  }
  MilpSolution out = detail::assignment_from_lines(model, *best_lines, best.objective_value);
  out.nodes = best.nodes;
  out.lp_pivots = best.lp_pivots;
  out.status = status;
  double lower = proved;
  while (!open.empty()) {
    lower = std::min(lower, open.top().bound);
    open.pop();
  }
  out.gap = std::max(0.0, out.objective_value - std::min(lower, out.objective_value));
  if (status == MilpStatus::Optimal) out.gap = std::min(out.gap, opts.abs_gap);
  return out;
}

enum class Winner { MaxProblem, MinProblem, Tie };

inline const char* to_string(Winner w) {
  switch (w) {
    case Winner::MaxProblem: return "max";
    case Winner::MinProblem: return "min";
    case Winner::Tie: return "tie";
  }
  return "?";
}

struct SolveReport {
  OneKnotSpline best_spline;
  double objective = 0.0;
  Winner winner = Winner::Tie;
  std::size_t nodes = 0;
  std::size_t lp_pivots = 0;
  double wall_time = 0.0;
  bool bigM_audit = true;
  OptimalityVerdict certificate;
  double big_m = 0.0;
  double max_objective = kInf;
  double min_objective = kInf;
  MilpStatus status = MilpStatus::Optimal;
  double gap = 0.0;
  std::vector<std::string> warnings;
};

/// Largest |L1 - L2| over the grid relative to M; the big-M rows are at most
/// this tight at the returned optimum.
inline double big_m_usage(const MilpModel& model, const MilpSolution& sol) {
  const VarIndex& v = model.var_index;
  const auto& x = sol.continuous_values;
  const AffinePiece l1{x[v.a1], x[v.b1]}, l2{x[v.a2], x[v.b2]};
  double worst = 0.0;
  for (double t : model.abscissae) worst = std::max(worst, std::abs(l1(t) - l2(t)));
  return worst / model.big_m;
}

/// Audit passes when no big-M row is within 1e-3 M of binding.
inline bool big_m_audit(const MilpModel& model, const MilpSolution& sol) {
  return big_m_usage(model, sol) < 1.0 - 1e-3;
}

namespace detail {

inline bool box_active(const MilpModel& model, const MilpSolution& sol) {
  const VarIndex& v = model.var_index;
  const auto& x = sol.continuous_values;
  const double tol = 1e-9;
  for (std::size_t col : {v.a1, v.a2})
    if (std::abs(x[col]) >= model.box.slope * (1 - tol)) return true;
  for (std::size_t col : {v.b1, v.b2})
    if (std::abs(x[col]) >= model.box.intercept * (1 - tol)) return true;
  return false;
}

struct ModelRun {
  MilpModel model;
  MilpSolution solution;
  bool audit = true;
};

inline ModelRun run_model(const SampledFunction& data, double big_m, ProblemKind kind, const BnbOptions& opts,
                          SolveReport& report) {
  ModelRun run{detail::build_model(data, big_m, kind), {}, true};
  run.solution = solve_milp(run.model, opts);
  report.nodes += run.solution.nodes;
  report.lp_pivots += run.solution.lp_pivots;
  if (run.solution.status == MilpStatus::Optimal && !big_m_audit(run.model, run.solution)) {
    run.audit = false;
    const double before = run.solution.objective_value;
    ModelRun again{detail::build_model(data, 2.0 * big_m, kind), {}, true};
    again.solution = solve_milp(again.model, opts);
    report.nodes += again.solution.nodes;
    report.lp_pivots += again.solution.lp_pivots;
    report.warnings.push_back(std::string("big-M audit failed for the ") + to_string(kind) +
                              " model; re-solved with M = " + std::to_string(2.0 * big_m) +
                              ", objective change " + std::to_string(again.solution.objective_value - before));
    again.audit = false;
    return again;
  }
  if (run.solution.status == MilpStatus::Optimal && box_active(run.model, run.solution))
    report.warnings.push_back(std::string("coefficient box active in the ") + to_string(kind) + " model optimum");
  return run;
}

/// Fills the fields shared by the solver and the oracle from the two model optima.
inline void finish_report(const SampledFunction& data, double abs_gap, const OneKnotSpline& max_spline,
                          const OneKnotSpline& min_spline, SolveReport& r) {
  if (std::abs(r.max_objective - r.min_objective) <= abs_gap) r.winner = Winner::Tie;
  else r.winner = r.max_objective < r.min_objective ? Winner::MaxProblem : Winner::MinProblem;
  r.best_spline = r.winner == Winner::MinProblem ? min_spline : max_spline;
  r.objective = deviation(r.best_spline, data).sup;

  // Optima are not unique; prefer a single line whenever it is optimal.
  if (data.size() >= 2 && r.best_spline.kind != SplineKind::Single) {
    const LineFit line = best_line(data);
    if (line.deviation <= r.objective + abs_gap) {
      r.best_spline = OneKnotSpline::single(line.line);
      r.objective = line.deviation;
    }
  }
  r.certificate = check_sufficient(data, r.best_spline);
}

}  // namespace detail

/// Solves the max and the min model and keeps the better optimum.
inline SolveReport solve_one_knot(const SampledFunction& data, const BnbOptions& opts = {}) {
  opts.validate();
  if (data.size() == 0) throw InvalidArgument("solve_one_knot: empty data");
  const auto start = std::chrono::steady_clock::now();
  SolveReport r;
  r.big_m = opts.M_override ? *opts.M_override : default_big_m(data);

  const auto mx = detail::run_model(data, r.big_m, ProblemKind::MaxProblem, opts, r);
  const auto mn = detail::run_model(data, r.big_m, ProblemKind::MinProblem, opts, r);
  r.bigM_audit = mx.audit && mn.audit;
  for (const auto* run : {&mx, &mn}) {
    if (run->solution.status != MilpStatus::Optimal) {
      r.status = run->solution.status;
      r.warnings.push_back(std::string(to_string(run->model.kind)) + " model stopped early: " +
                           to_string(run->solution.status));
    }
    r.gap = std::max(r.gap, run->solution.gap);
  }
  if (mx.solution.continuous_values.empty() || mn.solution.continuous_values.empty())
    throw Error("solve_one_knot: limit reached before any feasible assignment was found");

  r.max_objective = mx.solution.objective_value;
  r.min_objective = mn.solution.objective_value;
  MilpSolution mxs = mx.solution, mns = mn.solution;
  mxs.status = mns.status = MilpStatus::Optimal;  // spline recovery only
  detail::finish_report(data, opts.abs_gap, solution_to_spline(mx.model, mxs), solution_to_spline(mn.model, mns), r);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace detail {

/// Best pair of lines for a fixed monotone active pattern: points before k use
/// line `first` (0 or 1), the rest the other line. Every row is kept per point.
inline std::optional<std::pair<Lines, double>> enumerate_pattern(const SampledFunction& data, const CoefficientBox& box,
                                                                 double big_m, bool is_max, std::size_t k,
                                                                 int first) {
  LpProblem lp;
  const auto a1 = lp.add_variable(0.0, -box.slope, box.slope);
  const auto b1 = lp.add_variable(0.0, -box.intercept, box.intercept);
  const auto a2 = lp.add_variable(0.0, -box.slope, box.slope);
  const auto b2 = lp.add_variable(0.0, -box.intercept, box.intercept);
  const auto e = lp.add_variable(1.0, 0.0, kInf);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.t(i), f = data.f(i);
    const bool use_first = i < k;
    const bool line1 = use_first == (first == 0);
    const auto aa = line1 ? a1 : a2, ba = line1 ? b1 : b2;  // active
    const auto ao = line1 ? a2 : a1, bo = line1 ? b2 : b1;  // other
    lp.add_row({{aa, t}, {ba, 1.0}, {e, 1.0}}, Relation::GreaterEqual, f);
    lp.add_row({{aa, t}, {ba, 1.0}, {e, -1.0}}, Relation::LessEqual, f);
    // Max: other <= active <= other + M.  Min: active <= other <= active + M.
    const double s = is_max ? 1.0 : -1.0;
    lp.add_row({{aa, s * t}, {ba, s}, {ao, -s * t}, {bo, -s}}, Relation::GreaterEqual, 0.0);
    lp.add_row({{aa, s * t}, {ba, s}, {ao, -s * t}, {bo, -s}}, Relation::LessEqual, big_m);
  }
  const LpSolution sol = lp_solve_dual(lp);
  if (sol.status == LpStatus::Infeasible) return std::nullopt;
  if (sol.status != LpStatus::Optimal) throw NumericError("oracle_enumerate: pattern LP failed");
  return std::pair{Lines{{sol.x[a1], sol.x[b1]}, {sol.x[a2], sol.x[b2]}}, sol.objective_value};
}

}  // namespace detail

/// Independent check of solve_one_knot: solves one LP per crossover index and
/// orientation for both models and keeps the best.
inline SolveReport oracle_enumerate(const SampledFunction& data, std::optional<double> big_m = std::nullopt,
                                    double abs_gap = 1e-7) {
  if (data.size() == 0) throw InvalidArgument("oracle_enumerate: empty data");
  const auto start = std::chrono::steady_clock::now();
  SolveReport r;
  r.big_m = big_m ? *big_m : default_big_m(data);
  const CoefficientBox box = coefficient_box(data);
  const std::size_t n = data.size();

  OneKnotSpline splines[2];
  double values[2] = {kInf, kInf};
  for (int kind = 0; kind < 2; ++kind) {
    const bool is_max = kind == 0;
    for (int first = 0; first < 2; ++first) {
      for (std::size_t k = 0; k <= n; ++k) {
        const auto res = detail::enumerate_pattern(data, box, r.big_m, is_max, k, first);
        ++r.nodes;
        if (!res) continue;
        const auto& lines = res->first;
        const OneKnotSpline s = OneKnotSpline::combine(lines.l1, lines.l2,
                                                       is_max ? SplineKind::MaxOfTwo : SplineKind::MinOfTwo,
                                                       data.grid.c, data.grid.d);
        const double dev = deviation(s, data).sup;
        if (dev < values[kind]) {
          values[kind] = dev;
          splines[kind] = s;
        }
      }
    }
  }
  if (!std::isfinite(values[0]) || !std::isfinite(values[1]))
    throw InternalError("oracle_enumerate: no feasible pattern");
  r.max_objective = values[0];
  r.min_objective = values[1];
  detail::finish_report(data, abs_gap, splines[0], splines[1], r);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace freeknot
