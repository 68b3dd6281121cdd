#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "freeknot/bnb.hpp"
#include "freeknot/neural.hpp"
#include "freeknot/spline.hpp"

using namespace freeknot;
using Catch::Approx;

TEST_CASE("forward examples", "[neural]") {
  const ReluNet1 unit{{1.0}, {0.0}, {1.0}, 0.0};
  CHECK(forward(unit, 2.0) == 2.0);
  CHECK(forward(unit, -1.0) == 0.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ReluNet1 two{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, u(rng)};
  const LinearSpline s = relu_to_spline(two, -1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    CHECK(std::abs(s(x) - forward(two, x)) <= 1e-9);
  }
}

TEST_CASE("extract_knots examples", "[neural]") {
  CHECK(extract_knots(ReluNet1{{1.0}, {0.0}, {1.0}, 0.0}, -1.0, 1.0) == std::vector<double>{0.0});
  CHECK(extract_knots(ReluNet1{{0.0}, {5.0}, {1.0}, 0.0}, -1.0, 1.0).empty());
  CHECK(extract_knots(ReluNet1{{1.0}, {-2.0}, {1.0}, 0.0}, -1.0, 1.0).empty());
}

TEST_CASE("chebyshev_loss examples", "[neural]") {
  const Grid g = make_grid(-1.0, 1.0, 1e-3);
  const ReluNet1 zero{{0.0}, {0.0}, {0.0}, 0.0};
  const SampledFunction f1 = sample(BenchmarkId::F1, g);
  CHECK(chebyshev_loss(zero, f1) == 1.0);
  CHECK(chebyshev_loss(zero, sample([](double) { return 0.0; }, g)) == 0.0);

  // |t| + 0.125 = max(-t + 0.125, t + 0.125)
  const ReluNet1 opt{{1.0, -1.0}, {0.0, 0.0}, {1.0, 1.0}, 0.125};
  CHECK(chebyshev_loss(opt, f1) == Approx(0.125).margin(1e-3));
}

TEST_CASE("init_net", "[neural]") {
  const ReluNet1 a = init_net(3, 42);
  const ReluNet1 b = init_net(3, 42);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b1 == std::vector<double>(3, 0.0));
  CHECK(a.b2 == 0.0);
  for (double w : a.w1) CHECK(std::abs(w) < 1.0);
  CHECK(init_net(3, 43).w1 != a.w1);
  CHECK_THROWS_AS(init_net(0, 1), InvalidArgument);
}

TEST_CASE("subgradient matches finite differences", "[neural]") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t checked = 0;
  for (int trial = 0; checked < 100 && trial < 10000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
    ReluNet1 net;
    for (std::size_t j = 0; j < n; ++j) {
      net.w1.push_back(u(rng));
      net.b1.push_back(u(rng));
      net.w2.push_back(u(rng));
    }
    net.b2 = u(rng);
    const double a = u(rng), b = u(rng);
    const SampledFunction data = sample([&](double t) { return std::sin(3.0 * a * t) + b * t * t; },
                                        make_grid(-1.0, 1.0, 0.1));

    // Smooth configurations only: a clear argmax away from every kink.
    std::vector<double> mags;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < data.size(); ++j) {
      mags.push_back(std::abs(forward(net, data.t(j)) - data.f(j)));
      if (mags[j] > mags[arg]) arg = j;
    }
    std::vector<double> sorted = mags;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] < 1e-3) continue;
    bool kink = false;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(net.w1[j] * data.t(arg) + net.b1[j]) <= 1e-3) kink = true;
    if (kink) continue;

    const std::vector<double> g = loss_subgradient(net, data);
    const std::vector<double> p = flatten(net);
    for (std::size_t k = 0; k < p.size(); ++k) {
      std::vector<double> plus = p, minus = p;
      plus[k] += 1e-6;
      minus[k] -= 1e-6;
      const double fd = (chebyshev_loss(unflatten(plus, n), data) - chebyshev_loss(unflatten(minus, n), data)) / 2e-6;
      REQUIRE(std::abs(fd - g[k]) <= 1e-4 * std::max(1.0, std::abs(g[k])));
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("zero data stays at zero loss", "[neural]") {
  const SampledFunction data = sample([](double) { return 0.0; }, make_grid(-1.0, 1.0, 0.1));
  const ReluNet1 zero{{0.0}, {0.0}, {0.0}, 0.0};
  const auto [net, h] = train(zero, data, {});
  REQUIRE(h.loss_per_epoch.size() == 50);
  for (double l : h.loss_per_epoch) CHECK(l == 0.0);
}

TEST_CASE("training is deterministic for both optimizers", "[neural]") {
  const SampledFunction data = sample(BenchmarkId::F1, make_grid(-1.0, 1.0, 1e-2));
  for (auto opt : {Optimizer::Adam, Optimizer::Adamax}) {
    TrainConfig cfg;
    cfg.optimizer = opt;
    cfg.seed = 7;
    const auto [na, ha] = train(init_net(1, cfg.seed), data, cfg);
    const auto [nb, hb] = train(init_net(1, cfg.seed), data, cfg);
    CHECK(ha.loss_per_epoch == hb.loss_per_epoch);
    CHECK(na.w1 == nb.w1);
    CHECK(ha.final_loss == ha.loss_per_epoch.back());
    for (double l : ha.loss_per_epoch) CHECK(l >= ha.best_loss);
  }
}

TEST_CASE("a one-node net cannot beat the one-knot optimum", "[neural]") {
  for (auto id : kAllBenchmarks) {
    const SampledFunction data = sample(id, make_grid(-1.0, 1.0, 1e-2));
    const double bound = solve_one_knot(data).objective;
    for (auto opt : {Optimizer::Adam, Optimizer::Adamax}) {
      TrainConfig cfg;
      cfg.optimizer = opt;
      cfg.epochs = 100;
      const auto [net, h] = train(init_net(1, 3), data, cfg);
      CHECK(h.final_loss >= bound - 1e-6);
      CHECK(h.best_loss >= bound - 1e-6);
    }
  }
}

TEST_CASE("divergence is reported with its epoch", "[neural]") {
  const SampledFunction data = sample(BenchmarkId::F1, make_grid(-1.0, 1.0, 0.1));
  TrainConfig cfg;
  cfg.learning_rate = std::numeric_limits<double>::max();
  try {
    (void)train(init_net(2, 1), data, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() >= 1);
  }
}

TEST_CASE("invalid configurations", "[neural]") {
  TrainConfig cfg;
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
