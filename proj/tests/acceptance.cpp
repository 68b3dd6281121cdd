// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--allow-fail 1,2]
//
// Exit status is 0 when every criterion passes or fails only in the allowed set.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "freeknot/bnb.hpp"
#include "freeknot/cheb.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/lp.hpp"
#include "freeknot/neural.hpp"
#include "freeknot/spline.hpp"
#include "oracles.hpp"

using namespace freeknot;

namespace {

struct Expected {
  BenchmarkId id;
  double big_m;
  std::size_t epochs;
  double dev, dev_tol;
  std::optional<double> knot;
  double knot_tol;
  SplineKind kind;
  SufficientBranch branch;
};

const std::array<Expected, 5> kTable = {{
    {BenchmarkId::F1, 300.0, 50, 0.125, 1e-3, 0.0, 2e-3, SplineKind::MaxOfTwo, SufficientBranch::TwoPieces3and3},
    {BenchmarkId::F2, 300.0, 50, 0.165, 5e-3, 0.75, 5e-3, SplineKind::MaxOfTwo, SufficientBranch::TwoPieces3and3},
    {BenchmarkId::F3, 1e4, 50, 0.999, 5e-3, std::nullopt, 0.0, SplineKind::Single, SufficientBranch::SinglePiece4},
    {BenchmarkId::F4, 1e4, 100, 0.358, 5e-3, -0.231, 5e-3, SplineKind::MinOfTwo, SufficientBranch::TwoPieces3and3},
    {BenchmarkId::F5, 1e5, 300, 168.9, 1.0, -0.92, 1e-2, SplineKind::MinOfTwo, SufficientBranch::NotMet},
}};

constexpr double kStep = 1e-3;

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void fail(const std::string& what) {
    if (!pass) note << "; ";
    pass = false;
    note << what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SampledFunction benchmark_data(BenchmarkId id) { return sample(id, make_grid(-1.0, 1.0, kStep)); }

SampledFunction uniform_samples(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return sample([&](double) { return u(rng); }, make_grid(-1.0, 1.0, 2.0 / static_cast<double>(n - 1)));
}

struct TableRun {
  SampledFunction data;
  SolveReport report;
};

std::vector<TableRun> run_table(double& total_seconds) {
  std::vector<TableRun> runs;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Expected& e : kTable) {
    BnbOptions o;
    o.M_override = e.big_m;
    SampledFunction data = benchmark_data(e.id);
    SolveReport r = solve_one_knot(data, o);
    runs.push_back({std::move(data), std::move(r)});
  }
  total_seconds = seconds_since(t0);
  return runs;
}

Outcome table_reproduction(const std::vector<TableRun>& runs, double total_seconds) {
  Outcome out;
  for (std::size_t k = 0; k < kTable.size(); ++k) {
    const Expected& e = kTable[k];
    const SolveReport& r = runs[k].report;
    const std::string name(to_string(e.id));
    if (r.status != MilpStatus::Optimal) out.fail(name + " status " + to_string(r.status));
    if (std::abs(r.objective - e.dev) > e.dev_tol)
      out.fail(name + " dev " + fmt(r.objective) + " vs " + fmt(e.dev) + "+-" + fmt(e.dev_tol));
    if (r.best_spline.kind != e.kind)
      out.fail(name + " kind " + to_string(r.best_spline.kind) + " vs " + to_string(e.kind));
    if (e.knot) {
      if (!r.best_spline.knot) out.fail(name + " has no knot");
      else if (std::abs(*r.best_spline.knot - *e.knot) > e.knot_tol)
        out.fail(name + " knot " + fmt(*r.best_spline.knot) + " vs " + fmt(*e.knot) + "+-" + fmt(e.knot_tol));
    }
  }
  if (total_seconds >= 1800.0) out.fail("bench took " + fmt(total_seconds) + " s");
  if (out.pass) out.note << "five benchmarks within tolerance";
  out.note << "; bench " << fmt(total_seconds) << " s";
  return out;
}

Outcome certificates(const std::vector<TableRun>& runs) {
  Outcome out;
  std::ostringstream got;
  for (std::size_t k = 0; k < kTable.size(); ++k) {
    const OptimalityVerdict v = check_sufficient(runs[k].data, runs[k].report.best_spline);
    const std::string name(to_string(kTable[k].id));
    got << (k ? ", " : "") << name << " " << to_string(v.branch);
    if (v.branch != kTable[k].branch) out.fail(name + " " + to_string(v.branch) + " vs " + to_string(kTable[k].branch));
  }
  if (out.pass) out.note << got.str();
  return out;
}

Outcome oracle_equivalence() {
  Outcome out;
  for (const Expected& e : kTable) {
    const SampledFunction data = benchmark_data(e.id);
    BnbOptions o;
    o.M_override = e.big_m;
    const double bnb = solve_one_knot(data, o).objective;
    const double oracle = oracle_enumerate(data, e.big_m).objective;
    if (std::abs(bnb - oracle) > 1e-6)
      out.fail(std::string(to_string(e.id)) + " bnb " + fmt(bnb) + " oracle " + fmt(oracle));
  }
  std::mt19937_64 rng(51);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SampledFunction data = uniform_samples(rng, 51);
    const double diff = std::abs(solve_one_knot(data).objective - oracle_enumerate(data).objective);
    worst = std::max(worst, diff);
    if (diff > 1e-6) out.fail("51-point instance " + std::to_string(k) + " differs by " + fmt(diff));
  }
  std::mt19937_64 rng11(11);
  double worst_exact = 0.0;
  for (int k = 0; k < 20; ++k) {
    const SampledFunction data = uniform_samples(rng11, 11);
    const double big_m = default_big_m(data);
    const double exact = std::min(oracles::milp_brute_force(build_max_model(data, big_m)),
                                  oracles::milp_brute_force(build_min_model(data, big_m)));
    const double diff = std::max(std::abs(solve_one_knot(data).objective - exact),
                                 std::abs(oracle_enumerate(data).objective - exact));
    worst_exact = std::max(worst_exact, diff);
    if (diff > 1e-7) out.fail("11-point instance " + std::to_string(k) + " differs by " + fmt(diff));
  }
  if (out.pass)
    out.note << "benchmarks agree, 100 random max diff " << fmt(worst) << ", 20 exhaustive max diff "
             << fmt(worst_exact);
  return out;
}

Outcome analytic_anchor() {
  Outcome out;
  const SampledFunction data = sample(BenchmarkId::F1, make_grid(0.0, 1.0, kStep));
  const LineFit fit = best_line(data);
  if (std::abs(fit.deviation - 0.125) > 1e-3) out.fail("dev " + fmt(fit.deviation));
  if (std::abs(fit.line.slope - 1.0) > 1e-3) out.fail("slope " + fmt(fit.line.slope));
  if (std::abs(fit.line.intercept - 0.125) > 1e-3) out.fail("intercept " + fmt(fit.line.intercept));
  if (out.pass)
    out.note << "dev " << fmt(fit.deviation) << ", line " << fmt(fit.line.slope) << " t + " << fmt(fit.line.intercept);
  return out;
}

Outcome lp_core() {
  Outcome out;
  std::mt19937_64 rng(200);
  std::uniform_int_distribution<int> nv(1, 8), nr(1, 6);
  int optimal = 0, infeasible = 0;
  double worst_gap = 0.0, worst_dual = 0.0;
  for (int k = 0; k < 200; ++k) {
    const LpProblem p =
        oracles::random_bounded_lp(rng, static_cast<std::size_t>(nv(rng)), static_cast<std::size_t>(nr(rng)));
    const auto brute = oracles::vertex_enumeration(p);
    const LpSolution s = lp_solve(p);
    if (!brute) {
      ++infeasible;
      if (s.status != LpStatus::Infeasible) out.fail("instance " + std::to_string(k) + " should be infeasible");
      continue;
    }
    if (s.status != LpStatus::Optimal) {
      out.fail("instance " + std::to_string(k) + " status " + to_string(s.status));
      continue;
    }
    ++optimal;
    const double gap = std::abs(s.objective_value - *brute);
    const double dual = std::abs(s.objective_value - lp_dual_bound(p, s.dual_values));
    worst_gap = std::max(worst_gap, gap);
    worst_dual = std::max(worst_dual, dual);
    if (gap > 1e-7) out.fail("instance " + std::to_string(k) + " off by " + fmt(gap));
    if (dual > 1e-6) out.fail("instance " + std::to_string(k) + " duality residual " + fmt(dual));
  }
  if (out.pass)
    out.note << optimal << " optimal, " << infeasible << " infeasible, max gap " << fmt(worst_gap)
             << ", max duality residual " << fmt(worst_dual);
  return out;
}

Outcome relu_equivalence() {
  Outcome out;
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-2.0, 2.0), probe(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> width(1, 5);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    ReluNet1 net;
    const std::size_t n = width(rng);
    for (std::size_t j = 0; j < n; ++j) {
      net.w1.push_back(u(rng));
      net.b1.push_back(u(rng));
      net.w2.push_back(u(rng));
    }
    net.b2 = u(rng);
    const LinearSpline s = relu_to_spline(net, -1.0, 1.0);
    if (s.internal_knots().size() > n) out.fail("net " + std::to_string(k) + " has too many knots");
    for (int p = 0; p < 1000; ++p) {
      const double t = probe(rng);
      worst = std::max(worst, std::abs(s(t) - forward(net, t)));
    }
  }
  if (worst > 1e-9) out.fail("max mismatch " + fmt(worst));
  if (out.pass) out.note << "50 nets, max mismatch " << fmt(worst);
  return out;
}

bool subgradient_matches(const ReluNet1& net, const SampledFunction& data) {
  const std::size_t n = net.hidden();
  const std::vector<double> g = loss_subgradient(net, data);
  const std::vector<double> p = flatten(net);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::vector<double> plus = p, minus = p;
    plus[k] += 1e-6;
    minus[k] -= 1e-6;
    const double fd = (chebyshev_loss(unflatten(plus, n), data) - chebyshev_loss(unflatten(minus, n), data)) / 2e-6;
    if (std::abs(fd - g[k]) > 1e-4 * std::max(1.0, std::abs(g[k]))) return false;
  }
  return true;
}

// A configuration is smooth when the largest residual is unique and no hidden
// node sits near its kink at that point.
bool smooth(const ReluNet1& net, const SampledFunction& data) {
  std::vector<double> mags;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    mags.push_back(std::abs(forward(net, data.t(j)) - data.f(j)));
    if (mags[j] > mags[arg]) arg = j;
  }
  std::vector<double> sorted = mags;
  std::sort(sorted.rbegin(), sorted.rend());
  if (sorted.size() > 1 && sorted[0] - sorted[1] < 1e-3) return false;
  for (std::size_t j = 0; j < net.hidden(); ++j)
    if (std::abs(net.w1[j] * data.t(arg) + net.b1[j]) <= 1e-3) return false;
  return true;
}

Outcome nn_properties(const std::vector<TableRun>& runs) {
  Outcome out;
  std::ostringstream losses;
  for (std::size_t k = 0; k < kTable.size(); ++k) {
    const std::string name(to_string(kTable[k].id));
    const double milp = runs[k].report.objective;
    for (Optimizer opt : {Optimizer::Adam, Optimizer::Adamax}) {
      TrainConfig cfg;
      cfg.epochs = kTable[k].epochs;
      cfg.optimizer = opt;
      const auto [na, ha] = train(init_net(1, cfg.seed), runs[k].data, cfg);
      const auto [nb, hb] = train(init_net(1, cfg.seed), runs[k].data, cfg);
      if (ha.best_loss < milp - 1e-6)
        out.fail(name + " " + to_string(opt) + " loss " + fmt(ha.best_loss) + " below " + fmt(milp));
      if (ha.loss_per_epoch != hb.loss_per_epoch || flatten(na) != flatten(nb))
        out.fail(name + " " + to_string(opt) + " not deterministic");
      if (opt == Optimizer::Adam) losses << (k ? ", " : "") << name << " " << fmt(ha.final_loss);
    }
  }

  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t checked = 0, mismatched = 0;
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
    const SampledFunction data =
        sample([&](double t) { return std::sin(3.0 * a * t) + b * t * t; }, make_grid(-1.0, 1.0, 0.1));
    if (!smooth(net, data)) continue;
    ++checked;
    if (!subgradient_matches(net, data)) ++mismatched;
  }
  if (checked < 100) out.fail("only " + std::to_string(checked) + " smooth configurations");
  if (mismatched > 0) out.fail(std::to_string(mismatched) + " subgradient mismatches");
  if (out.pass) out.note << "adam losses " << losses.str() << ", 100 subgradients match";
  return out;
}

Outcome big_m_audits(const std::vector<TableRun>& runs) {
  Outcome out;
  int passes = 0;
  for (std::size_t k = 0; k < kTable.size(); ++k) {
    const std::string name(to_string(kTable[k].id));
    const SolveReport& r = runs[k].report;
    if (r.bigM_audit) {
      ++passes;
      continue;
    }
    BnbOptions o;
    o.M_override = 2.0 * kTable[k].big_m;
    const double doubled = solve_one_knot(runs[k].data, o).objective;
    if (std::abs(doubled - r.objective) >= 1e-6)
      out.fail(name + " audit failed and doubled M moves the objective by " + fmt(std::abs(doubled - r.objective)));
  }
  if (out.pass) out.note << passes << " of 5 audits pass";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> allow_fail;
  app.add_option("--allow-fail", allow_fail, "criteria whose failure does not change the exit status")
      ->delimiter(',')
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  const std::set<int> allowed(allow_fail.begin(), allow_fail.end());

  double table_seconds = 0.0;
  const std::vector<TableRun> runs = run_table(table_seconds);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"benchmark table", [&] { return table_reproduction(runs, table_seconds); }},
      {"optimality certificates", [&] { return certificates(runs); }},
      {"oracle equivalence", oracle_equivalence},
      {"best line for sqrt on [0, 1]", analytic_anchor},
      {"LP core", lp_core},
      {"ReLU to spline equivalence", relu_equivalence},
      {"neural network properties", [&] { return nn_properties(runs); }},
      {"big-M audit", [&] { return big_m_audits(runs); }},
  };

  int passed = 0, blocking = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (o.pass) ++passed;
    else if (!allowed.count(id)) ++blocking;
    std::printf("%s %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), seconds_since(t0),
                o.note.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return blocking == 0 ? 0 : 1;
}
