#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "freeknot/funcs.hpp"

using namespace freeknot;
using Catch::Approx;

TEST_CASE("make_grid includes both endpoints", "[funcs]") {
  const Grid g = make_grid(-1.0, 1.0, 1e-3);
  REQUIRE(g.size() == 2001);
  CHECK(g.points.front() == -1.0);
  CHECK(g.points.back() == 1.0);
  for (std::size_t j = 1; j < g.size(); ++j) {
    REQUIRE(g.points[j] > g.points[j - 1]);
    CHECK(std::abs(g.points[j] - g.points[j - 1] - 1e-3) <= 1e-12);
  }
}

TEST_CASE("make_grid small cases", "[funcs]") {
  const Grid two = make_grid(0.0, 1.0, 1.0);
  REQUIRE(two.size() == 2);
  CHECK(two.points[0] == 0.0);
  CHECK(two.points[1] == 1.0);

  const Grid five = make_grid(-1.0, 1.0, 0.5);
  REQUIRE(five.size() == 5);
  const double expect[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t j = 0; j < 5; ++j) CHECK(five.points[j] == expect[j]);
}

TEST_CASE("make_grid snaps the last point to d", "[funcs]") {
  const Grid g = make_grid(0.0, 1.0, 0.3);
  REQUIRE(g.size() == 4);
  CHECK(g.points.back() == 1.0);
  CHECK(g.points[2] == Approx(0.6));
}

TEST_CASE("make_grid rejects bad input", "[funcs]") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(make_grid(1.0, -1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0.0, 0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, -0.1), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(nan, 1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0.0, std::numeric_limits<double>::infinity(), 0.1), InvalidArgument);
}

TEST_CASE("grid generation is bit-identical", "[funcs]") {
  const Grid a = make_grid(-1.0, 1.0, 1e-3);
  const Grid b = make_grid(-1.0, 1.0, 1e-3);
  CHECK(a.points == b.points);
}

TEST_CASE("benchmark values", "[funcs]") {
  const Grid g = make_grid(-1.0, 1.0, 1e-3);
  const SampledFunction f1 = sample(BenchmarkId::F1, g);
  CHECK(f1.f(1000) == 0.0);
  CHECK(f1.f(2000) == 1.0);
  CHECK(f1.f(0) == 1.0);

  CHECK(sample(BenchmarkId::F4, g).f(1000) == 2.0);
  CHECK(sample(BenchmarkId::F5, g).f(0) == Approx(-2.0).epsilon(1e-15));

  const SampledFunction f2 = sample(BenchmarkId::F2, g);
  CHECK(f2.f(1750) == Approx(0.0).margin(1e-7));
  const SampledFunction f3 = sample(BenchmarkId::F3, g);
  CHECK(f3.f(1250) == Approx(1.0));

  for (auto id : kAllBenchmarks) {
    const SampledFunction s = sample(id, g);
    REQUIRE(s.size() == g.size());
    for (std::size_t j = 0; j < s.size(); ++j) REQUIRE(std::isfinite(s.f(j)));
    CHECK(parse_benchmark(to_string(id)) == id);
  }
  CHECK_THROWS_AS(parse_benchmark("f6"), InvalidArgument);
}

TEST_CASE("f5 keeps its large unclipped spike", "[funcs]") {
  const SampledFunction f5 = sample(BenchmarkId::F5, make_grid(-1.0, 1.0, 1e-3));
  const auto [lo, hi] = value_range(f5);
  CHECK(hi > 100.0);
  CHECK(lo < -100.0);
}

TEST_CASE("restriction to a coarser compatible grid", "[funcs]") {
  const Grid fine = make_grid(-1.0, 1.0, 1e-3);
  const Grid coarse = make_grid(-1.0, 1.0, 1e-2);
  for (auto id : kAllBenchmarks) {
    const SampledFunction a = sample(id, fine);
    const SampledFunction b = sample(id, coarse);
    for (std::size_t j = 0; j < coarse.size(); ++j) {
      REQUIRE(a.t(10 * j) == b.t(j));
      REQUIRE(a.f(10 * j) == b.f(j));
    }
  }
}

TEST_CASE("custom evaluator", "[funcs]") {
  const Grid g = make_grid(0.0, 1.0, 0.25);
  const SampledFunction s = sample([](double t) { return std::sin(std::numbers::pi * t); }, g, "sine");
  CHECK(s.label == "sine");
  CHECK(s.f(2) == Approx(1.0));
  CHECK_THROWS_AS(sample([](double t) { return 1.0 / t; }, g), InvalidArgument);
}

TEST_CASE("sampled data from explicit points", "[funcs]") {
  const SampledFunction s = make_sampled({0.0, 0.1, 0.5}, {1.0, 2.0, 3.0}, "pts");
  CHECK(s.grid.c == 0.0);
  CHECK(s.grid.d == 0.5);
  CHECK(s.size() == 3);
  CHECK_THROWS_AS(make_sampled({0.0, 0.0}, {1.0, 2.0}, "dup"), InvalidArgument);
  CHECK_THROWS_AS(make_sampled({0.0, 1.0}, {1.0}, "short"), InvalidArgument);
}
