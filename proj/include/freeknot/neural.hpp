#pragma once

// Full-batch training of a one-hidden-layer ReLU network under the Chebyshev
// (max absolute error) loss with ADAM or ADAMAX.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "freeknot/error.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/relu_net.hpp"

namespace freeknot {

enum class Optimizer { Adam, Adamax };

inline const char* to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "adamax"; }

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::Adam;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw InvalidArgument("TrainConfig: learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw InvalidArgument("TrainConfig: betas must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw InvalidArgument("TrainConfig: epsilon must be positive");
  }
};

struct TrainHistory {
  std::vector<double> loss_per_epoch;
  double final_loss = 0.0;
  double best_loss = 0.0;
  double wall_time = 0.0;
};

/// Weights uniform in (-1, 1), biases zero.
inline ReluNet1 init_net(std::size_t hidden, std::uint64_t seed) {
  if (hidden == 0) throw InvalidArgument("init_net: at least one hidden node required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ReluNet1 net;
  net.w1.resize(hidden);
  net.w2.resize(hidden);
  net.b1.assign(hidden, 0.0);
  for (std::size_t j = 0; j < hidden; ++j) net.w1[j] = u(rng);
  for (std::size_t j = 0; j < hidden; ++j) net.w2[j] = u(rng);
  return net;
}

inline double chebyshev_loss(const ReluNet1& net, const SampledFunction& data) {
  double loss = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double r = std::abs(forward(net, data.t(j)) - data.f(j));
    if (std::isnan(r)) return r;
    loss = std::max(loss, r);
  }
  return loss;
}

/// Parameters flattened as (w1, b1, w2, b2).
inline std::vector<double> flatten(const ReluNet1& net) {
  std::vector<double> p;
  p.reserve(3 * net.hidden() + 1);
  p.insert(p.end(), net.w1.begin(), net.w1.end());
  p.insert(p.end(), net.b1.begin(), net.b1.end());
  p.insert(p.end(), net.w2.begin(), net.w2.end());
  p.push_back(net.b2);
  return p;
}

inline ReluNet1 unflatten(const std::vector<double>& p, std::size_t hidden) {
  if (p.size() != 3 * hidden + 1) throw InvalidArgument("unflatten: wrong parameter count");
  ReluNet1 net;
  const auto n = static_cast<std::ptrdiff_t>(hidden);
  net.w1.assign(p.begin(), p.begin() + n);
  net.b1.assign(p.begin() + n, p.begin() + 2 * n);
  net.w2.assign(p.begin() + 2 * n, p.begin() + 3 * n);
  net.b2 = p.back();
  return net;
}

/// Subgradient of the loss in flattened layout: the gradient of |y - f| at the
/// first point attaining the maximum.
inline std::vector<double> loss_subgradient(const ReluNet1& net, const SampledFunction& data) {
  const std::size_t n = net.hidden();
  std::vector<double> g(3 * n + 1, 0.0);
  if (data.size() == 0) return g;
  std::size_t arg = 0;
  double worst = -1.0, residual = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double r = forward(net, data.t(j)) - data.f(j);
    if (std::abs(r) > worst) {
      worst = std::abs(r);
      residual = r;
      arg = j;
    }
  }
  const double sign = residual > 0.0 ? 1.0 : (residual < 0.0 ? -1.0 : 0.0);
  const double x = data.t(arg);
  for (std::size_t j = 0; j < n; ++j) {
    const double z = net.w1[j] * x + net.b1[j];
    const double active = z > 0.0 ? 1.0 : 0.0;
    g[j] = sign * net.w2[j] * active * x;
    g[n + j] = sign * net.w2[j] * active;
    g[2 * n + j] = sign * relu(z);
  }
  g[3 * n] = sign;
  return g;
}

/// Runs cfg.epochs optimizer steps, one per epoch, on the full data set.
inline std::pair<ReluNet1, TrainHistory> train(const ReluNet1& net0, const SampledFunction& data,
                                               const TrainConfig& cfg) {
  cfg.validate();
  net0.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = net0.hidden();
  std::vector<double> p = flatten(net0);
  std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0);
  ReluNet1 net = net0;
  TrainHistory h;
  h.best_loss = chebyshev_loss(net, data);
  double beta1_t = 1.0, beta2_t = 1.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<double> g = loss_subgradient(net, data);
    beta1_t *= cfg.beta1;
    beta2_t *= cfg.beta2;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      const double m_hat = m[k] / (1.0 - beta1_t);
      if (cfg.optimizer == Optimizer::Adam) {
        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
        const double v_hat = v[k] / (1.0 - beta2_t);
        p[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      } else {
        v[k] = std::max(cfg.beta2 * v[k], std::abs(g[k]));
        p[k] -= cfg.learning_rate * m_hat / (v[k] + cfg.epsilon);
      }
    }
    net = unflatten(p, n);
    const double loss = chebyshev_loss(net, data);
    if (!std::isfinite(loss))
      throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch));
    h.loss_per_epoch.push_back(loss);
    h.best_loss = std::min(h.best_loss, loss);
  }
  h.final_loss = h.loss_per_epoch.empty() ? chebyshev_loss(net, data) : h.loss_per_epoch.back();
  h.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {net, h};
}

}  // namespace freeknot
