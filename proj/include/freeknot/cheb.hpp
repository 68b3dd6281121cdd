#pragma once

// Fixed-knot Chebyshev fits and alternation-based optimality certificates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "freeknot/error.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/lp.hpp"
#include "freeknot/spline.hpp"

namespace freeknot {

inline constexpr double kDefaultTauAlt = 1e-6;

struct LineFit {
  AffinePiece line;
  double deviation = 0.0;
};

/// Chebyshev-optimal line on the points first..last (inclusive).
inline LineFit best_line(const SampledFunction& data, std::size_t first, std::size_t last) {
  if (data.size() == 0 || first > last || last >= data.size())
    throw InvalidArgument("best_line: empty or invalid index range");
  if (first == last) return {{0.0, data.f(first)}, 0.0};
  if (last == first + 1) {
    const double slope = (data.f(last) - data.f(first)) / (data.t(last) - data.t(first));
    return {{slope, data.f(first) - slope * data.t(first)}, 0.0};
  }

  // min e  s.t.  -e <= f_j - (a t_j + b) <= e
  LpProblem lp;
  const auto a = lp.add_variable(0.0, -kInf, kInf);
  const auto b = lp.add_variable(0.0, -kInf, kInf);
  const auto e = lp.add_variable(1.0, 0.0, kInf);
  for (std::size_t j = first; j <= last; ++j) {
    lp.add_row({{a, data.t(j)}, {b, 1.0}, {e, 1.0}}, Relation::GreaterEqual, data.f(j));
    lp.add_row({{a, data.t(j)}, {b, 1.0}, {e, -1.0}}, Relation::LessEqual, data.f(j));
  }
  const LpSolution s = lp_solve_dual(lp);
  if (s.status != LpStatus::Optimal) throw InternalError("best_line: LP not optimal");
  const AffinePiece line{s.x[a], s.x[b]};
  double dev = 0.0;
  for (std::size_t j = first; j <= last; ++j) dev = std::max(dev, std::abs(data.f(j) - line(data.t(j))));
  return {line, dev};
}

inline LineFit best_line(const SampledFunction& data) { return best_line(data, 0, data.size() - 1); }

struct KnotFit {
  OneKnotSpline spline;
  double deviation = 0.0;
};

/// Chebyshev-optimal continuous two-piece spline with its knot fixed at theta.
inline KnotFit fixed_knot_fit(const SampledFunction& data, double theta) {
  const double c = data.grid.c, d = data.grid.d;
  if (!(theta > c && theta < d)) throw InvalidArgument("fixed_knot_fit: knot must lie in (c, d)");

  LpProblem lp;
  const auto a1 = lp.add_variable(0.0, -kInf, kInf);
  const auto b1 = lp.add_variable(0.0, -kInf, kInf);
  const auto a2 = lp.add_variable(0.0, -kInf, kInf);
  const auto b2 = lp.add_variable(0.0, -kInf, kInf);
  const auto e = lp.add_variable(1.0, 0.0, kInf);
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double t = data.t(j);
    const bool left = t <= theta;
    const auto a = left ? a1 : a2;
    const auto b = left ? b1 : b2;
    lp.add_row({{a, t}, {b, 1.0}, {e, 1.0}}, Relation::GreaterEqual, data.f(j));
    lp.add_row({{a, t}, {b, 1.0}, {e, -1.0}}, Relation::LessEqual, data.f(j));
  }
  lp.add_row({{a1, theta}, {b1, 1.0}, {a2, -theta}, {b2, -1.0}}, Relation::Equal, 0.0);
  const LpSolution s = lp_solve_dual(lp);
  if (s.status != LpStatus::Optimal) throw InternalError("fixed_knot_fit: LP not optimal");

  const AffinePiece left{s.x[a1], s.x[b1]};
  const AffinePiece right{s.x[a2], s.x[b2]};
  // Pieces meeting at theta form a max when the slope increases, a min otherwise.
  const SplineKind kind = left.slope <= right.slope ? SplineKind::MaxOfTwo : SplineKind::MinOfTwo;
  KnotFit fit{OneKnotSpline::combine(left, right, kind, c, d), 0.0};
  fit.deviation = deviation(fit.spline, data).sup;
  return fit;
}

struct AlternationReport {
  double tolerance = kDefaultTauAlt;
  double sup = 0.0;
  std::vector<std::size_t> extreme_indices;
  std::size_t longest_alternating = 0;
  std::vector<std::size_t> sequence_indices;
  std::optional<std::pair<std::size_t, std::size_t>> per_subinterval;
  // True when a grid point sits on the knot and was counted in both subintervals.
  bool knot_point_shared = false;
};

namespace detail {

/// Collapses runs of equal sign to their largest-magnitude member; what remains
/// alternates and is a longest alternating subsequence.
inline std::vector<std::size_t> alternating_representatives(const std::vector<double>& residuals,
                                                            const std::vector<std::size_t>& extremes) {
  std::vector<std::size_t> reps;
  for (std::size_t j : extremes) {
    if (!reps.empty() && std::signbit(residuals[reps.back()]) == std::signbit(residuals[j])) {
      if (std::abs(residuals[j]) > std::abs(residuals[reps.back()])) reps.back() = j;
      continue;
    }
    reps.push_back(j);
  }
  return reps;
}

}  // namespace detail

/// Extreme points (|r| >= (1 - tau) sup) of f - s and their alternation. When a
/// knot in (c, d) is given, the two subintervals [c, knot] and [knot, d] are
/// also counted separately; a grid point on the knot belongs to both.
template <class Spline>
AlternationReport find_alternating(const SampledFunction& data, const Spline& s, double tau_alt = kDefaultTauAlt,
                                   std::optional<double> knot = std::nullopt) {
  if (!(tau_alt >= 0.0 && tau_alt < 0.5)) throw InvalidArgument("find_alternating: tau must lie in [0, 0.5)");
  AlternationReport rep;
  rep.tolerance = tau_alt;
  const DeviationProfile prof = deviation(s, data, tau_alt);
  rep.sup = prof.sup;
  if (prof.sup == 0.0) return rep;
  rep.extreme_indices = prof.argmax_indices;
  rep.sequence_indices = detail::alternating_representatives(prof.residuals, rep.extreme_indices);
  rep.longest_alternating = rep.sequence_indices.size();

  const double c = data.grid.c, d = data.grid.d;
  if (knot && *knot > c && *knot < d) {
    const double tol = 1e-9 * (d - c);
    std::vector<std::size_t> left, right;
    for (std::size_t j : rep.extreme_indices) {
      const double t = data.t(j);
      if (t <= *knot + tol) left.push_back(j);
      if (t >= *knot - tol) right.push_back(j);
      if (std::abs(t - *knot) <= tol) rep.knot_point_shared = true;
    }
    rep.per_subinterval = std::pair{detail::alternating_representatives(prof.residuals, left).size(),
                                    detail::alternating_representatives(prof.residuals, right).size()};
  }
  return rep;
}

enum class SufficientBranch { TwoPieces3and3, SinglePiece4, NotMet };

inline const char* to_string(SufficientBranch b) {
  switch (b) {
    case SufficientBranch::TwoPieces3and3: return "TwoPieces3and3";
    case SufficientBranch::SinglePiece4: return "SinglePiece4";
    case SufficientBranch::NotMet: return "NotMet";
  }
  return "?";
}

struct OptimalityVerdict {
  bool sufficient_met = false;
  SufficientBranch branch = SufficientBranch::NotMet;
  AlternationReport details;
};

/// Sufficient optimality test for one-knot splines: two distinct pieces with at
/// least three alternating points on each side of the knot, or a single piece
/// with at least four on the whole interval. NotMet says nothing about optimality.
inline OptimalityVerdict check_sufficient(const SampledFunction& data, const OneKnotSpline& s,
                                          double tau_alt = kDefaultTauAlt) {
  OptimalityVerdict v;
  const double c = data.grid.c, d = data.grid.d;
  const bool two_pieces = s.kind != SplineKind::Single && s.knot && *s.knot > c && *s.knot < d &&
                          !(s.piece1 == s.piece2);
  v.details = find_alternating(data, s, tau_alt, two_pieces ? s.knot : std::nullopt);
  if (two_pieces) {
    const auto [left, right] = *v.details.per_subinterval;
    if (left >= 3 && right >= 3) v.branch = SufficientBranch::TwoPieces3and3;
  } else if (s.kind == SplineKind::Single && v.details.longest_alternating >= 4) {
    v.branch = SufficientBranch::SinglePiece4;
  }
  v.sufficient_met = v.branch != SufficientBranch::NotMet;
  return v;
}

}  // namespace freeknot
