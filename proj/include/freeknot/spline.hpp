#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "freeknot/error.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/relu_net.hpp"

namespace freeknot {

struct AffinePiece {
  double slope = 0.0;
  double intercept = 0.0;

  constexpr double operator()(double t) const noexcept { return slope * t + intercept; }
  friend constexpr bool operator==(const AffinePiece&, const AffinePiece&) = default;
};

enum class SplineKind { MaxOfTwo, MinOfTwo, Single };

inline const char* to_string(SplineKind k) {
  switch (k) {
    case SplineKind::MaxOfTwo: return "max";
    case SplineKind::MinOfTwo: return "min";
    case SplineKind::Single: return "single";
  }
  return "?";
}

/// Continuous spline with at most one internal knot, stored as the max or min
/// of two affine pieces. A Single spline keeps piece2 == piece1 and no knot.
struct OneKnotSpline {
  AffinePiece piece1;
  AffinePiece piece2;
  SplineKind kind = SplineKind::Single;
  std::optional<double> knot;

  static OneKnotSpline single(AffinePiece p) { return {p, p, SplineKind::Single, std::nullopt}; }

  /// Max (or min) of two pieces restricted to [c, d]. Identical pieces, parallel
  /// pieces, and crossings outside the open interval (c, d) collapse to the
  /// single piece that is active on [c, d].
  static OneKnotSpline combine(AffinePiece p1, AffinePiece p2, SplineKind kind, double c, double d) {
    if (kind == SplineKind::Single) return single(p1);
    const bool is_max = kind == SplineKind::MaxOfTwo;
    auto pick = [&](double t) {
      const double v1 = p1(t), v2 = p2(t);
      return (is_max ? v1 >= v2 : v1 <= v2) ? p1 : p2;
    };
    const double scale = 1.0 + std::max(std::abs(p1.intercept), std::abs(p2.intercept));
    if (std::abs(p1.slope - p2.slope) <= 1e-12 * (1.0 + std::abs(p1.slope))) {
      if (std::abs(p1.intercept - p2.intercept) <= 1e-12 * scale) return single(p1);
      return single(pick(0.5 * (c + d)));
    }
    const double theta = (p2.intercept - p1.intercept) / (p1.slope - p2.slope);
    if (!(theta > c && theta < d)) return single(pick(0.5 * (c + d)));
    return {p1, p2, kind, theta};
  }

  static OneKnotSpline max_of(AffinePiece p1, AffinePiece p2, double c, double d) {
    return combine(p1, p2, SplineKind::MaxOfTwo, c, d);
  }
  static OneKnotSpline min_of(AffinePiece p1, AffinePiece p2, double c, double d) {
    return combine(p1, p2, SplineKind::MinOfTwo, c, d);
  }

  double operator()(double t) const noexcept {
    switch (kind) {
      case SplineKind::MaxOfTwo: return std::max(piece1(t), piece2(t));
      case SplineKind::MinOfTwo: return std::min(piece1(t), piece2(t));
      case SplineKind::Single: break;
    }
    return piece1(t);
  }

  /// Piece active to the left of the knot (piece1 for Single).
  AffinePiece left_piece() const noexcept {
    if (kind == SplineKind::Single) return piece1;
    const bool first_flatter = piece1.slope < piece2.slope;
    // max: the flatter piece dominates on the left; min: the steeper one.
    return (kind == SplineKind::MaxOfTwo) == first_flatter ? piece1 : piece2;
  }
  AffinePiece right_piece() const noexcept {
    if (kind == SplineKind::Single) return piece1;
    const AffinePiece l = left_piece();
    return l == piece1 ? piece2 : piece1;
  }
};

inline double eval_one_knot(const OneKnotSpline& s, double t) noexcept { return s(t); }

/// Truncated-power form s(t) = a_0 + sum_{i>=1} a_i max(0, t - knots[i-1]),
/// knots = (theta_0 = c, ..., theta_n = d).
struct LinearSpline {
  std::vector<double> a;
  std::vector<double> knots;

  std::size_t pieces() const noexcept { return knots.empty() ? 0 : knots.size() - 1; }

  void validate() const {
    if (knots.size() < 2 || a.size() != knots.size())
      throw InvalidArgument("LinearSpline: need n+1 coefficients for n+1 knots, n >= 1");
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (knots[i] < knots[i - 1]) throw InvalidArgument("LinearSpline: knots out of order");
  }

  std::vector<double> internal_knots() const {
    return knots.size() > 2 ? std::vector<double>(knots.begin() + 1, knots.end() - 1) : std::vector<double>{};
  }

  double operator()(double t) const {
    if (t < knots.front() || t > knots.back())
      throw InvalidArgument("LinearSpline: evaluation point outside [theta_0, theta_n]");
    double s = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) s += a[i] * std::max(0.0, t - knots[i - 1]);
    return s;
  }
};

inline double eval_truncated_power(const LinearSpline& s, double t) { return s(t); }

inline LinearSpline to_truncated_power(const OneKnotSpline& s, double c, double d) {
  if (s.kind == SplineKind::Single || !s.knot)
    return LinearSpline{{s.piece1(c), s.piece1.slope}, {c, d}};
  const AffinePiece left = s.left_piece();
  const AffinePiece right = s.right_piece();
  return LinearSpline{{left(c), left.slope, right.slope - left.slope}, {c, *s.knot, d}};
}

/// Exact truncated-power representation of a one-hidden-layer ReLU network on [c, d].
inline LinearSpline relu_to_spline(const ReluNet1& net, double c, double d) {
  net.validate();
  if (!(c < d)) throw InvalidArgument("relu_to_spline: require c < d");
  const std::vector<double> inner = extract_knots(net, c, d);
  std::vector<double> knots;
  knots.reserve(inner.size() + 2);
  knots.push_back(c);
  knots.insert(knots.end(), inner.begin(), inner.end());
  knots.push_back(d);

  // Slope of y on an open segment: sum of w2_j w1_j over the nodes active there.
  auto slope_at = [&](double x) {
    double slope = 0.0;
    for (std::size_t j = 0; j < net.hidden(); ++j)
      if (net.w1[j] * x + net.b1[j] > 0.0) slope += net.w2[j] * net.w1[j];
    return slope;
  };

  LinearSpline s;
  s.knots = knots;
  s.a.push_back(forward(net, c));
  double previous = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double slope = slope_at(0.5 * (knots[i] + knots[i + 1]));
    s.a.push_back(slope - previous);
    previous = slope;
  }
  return s;
}

/// Residuals f(t_j) - s(t_j) of a candidate spline against sampled data.
struct DeviationProfile {
  std::vector<double> residuals;
  double sup = 0.0;
  std::vector<std::size_t> argmax_indices;
};

template <class Spline>
DeviationProfile deviation(const Spline& s, const SampledFunction& data, double tau_alt = 1e-6) {
  DeviationProfile p;
  p.residuals.resize(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    p.residuals[j] = data.f(j) - s(data.t(j));
    p.sup = std::max(p.sup, std::abs(p.residuals[j]));
  }
  if (p.sup > 0.0) {
    const double floor = (1.0 - tau_alt) * p.sup;
    for (std::size_t j = 0; j < data.size(); ++j)
      if (std::abs(p.residuals[j]) >= floor) p.argmax_indices.push_back(j);
  }
  return p;
}

}  // namespace freeknot
