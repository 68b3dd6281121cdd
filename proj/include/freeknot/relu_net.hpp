#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "freeknot/error.hpp"

namespace freeknot {

/// One-hidden-layer ReLU network y(x) = sum_j w2_j max(0, w1_j x + b1_j) + b2.
struct ReluNet1 {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  std::size_t hidden() const noexcept { return w1.size(); }

  void validate() const {
    if (w1.empty()) throw InvalidArgument("ReluNet1: at least one hidden node required");
    if (b1.size() != w1.size() || w2.size() != w1.size())
      throw InvalidArgument("ReluNet1: weight vectors differ in length");
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(w1) || !finite(b1) || !finite(w2) || !std::isfinite(b2))
      throw InvalidArgument("ReluNet1: non-finite weight");
  }
};

inline double relu(double a) noexcept { return a > 0.0 ? a : 0.0; }

inline double forward(const ReluNet1& net, double x) noexcept {
  double y = net.b2;
  for (std::size_t j = 0; j < net.w1.size(); ++j) y += net.w2[j] * relu(net.w1[j] * x + net.b1[j]);
  return y;
}

/// Sorted internal knots -b1/w1 in (c, d); knots closer than 1e-9 (d - c) merge.
inline std::vector<double> extract_knots(const ReluNet1& net, double c, double d) {
  std::vector<double> raw;
  for (std::size_t j = 0; j < net.w1.size(); ++j) {
    if (std::abs(net.w1[j]) <= 1e-12) continue;
    const double theta = -net.b1[j] / net.w1[j];
    if (theta > c && theta < d) raw.push_back(theta);
  }
  std::sort(raw.begin(), raw.end());
  const double merge = 1e-9 * (d - c);
  std::vector<double> knots;
  for (double k : raw)
    if (knots.empty() || k - knots.back() > merge) knots.push_back(k);
  return knots;
}

}  // namespace freeknot
