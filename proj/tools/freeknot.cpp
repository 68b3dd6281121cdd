// freeknot: one-knot Chebyshev spline fitting from the command line.
//
//   freeknot solve --fn f1 --h 1e-3 --M 300
//   freeknot bench [--h 0.01] [--oracle]
//   freeknot train --fn f4 --epochs 100
//   freeknot check --spline report_spline.json --fn f1
//
// Any command accepts --config FILE with flat key=value lines naming the
// command's long flags; flags given on the command line take precedence.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "freeknot/bnb.hpp"
#include "freeknot/cheb.hpp"
#include "freeknot/io.hpp"
#include "freeknot/neural.hpp"

namespace fs = std::filesystem;
using namespace freeknot;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLimit = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitNotMet = 4;
constexpr int kExitUsage = 64;
constexpr int kExitBadInput = 65;

double table_big_m(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::F1:
    case BenchmarkId::F2: return 300.0;
    case BenchmarkId::F3:
    case BenchmarkId::F4: return 1e4;
    case BenchmarkId::F5: return 1e5;
  }
  return 1e4;
}

std::size_t table_epochs(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::F4: return 100;
    case BenchmarkId::F5: return 300;
    default: return 50;
  }
}

struct DataArgs {
  std::string fn;
  std::string csv;
  double c = -1.0, d = 1.0, h = 1e-3;

  void add(CLI::App* app) {
    auto* f = app->add_option("--fn", fn, "benchmark function f1..f5");
    auto* p = app->add_option("--csv", csv, "data file with header t,f");
    f->excludes(p);
    app->add_option("--c", c, "left end of the interval");
    app->add_option("--d", d, "right end of the interval");
    app->add_option("--h", h, "grid step");
  }

  std::optional<BenchmarkId> benchmark() const {
    if (fn.empty()) return std::nullopt;
    return parse_benchmark(fn);
  }

  SampledFunction load() const {
    if (!csv.empty()) {
      std::ifstream in(csv);
      if (!in) throw ParseError("cannot open " + csv);
      return read_csv(in, fs::path(csv).stem().string());
    }
    if (fn.empty()) throw InvalidArgument("one of --fn or --csv is required");
    return sample(parse_benchmark(fn), make_grid(c, d, h));
  }
};

struct SolverArgs {
  std::optional<double> big_m;
  double gap = 1e-7;
  std::size_t node_limit = 1'000'000;
  double time_limit = 0.0;
  std::string branching = "crossover";

  void add(CLI::App* app) {
    app->add_option("--M", big_m, "big-M constant");
    app->add_option("--gap", gap, "absolute optimality gap");
    app->add_option("--node-limit", node_limit, "branch-and-bound node limit");
    app->add_option("--time-limit", time_limit, "time limit per model in seconds (0 = none)");
    app->add_option("--branching", branching, "crossover or most_fractional")
        ->check(CLI::IsMember({"crossover", "most_fractional"}));
  }

  BnbOptions options() const {
    BnbOptions o;
    o.abs_gap = gap;
    o.node_limit = node_limit;
    if (time_limit > 0.0) o.time_limit = time_limit;
    o.branching = branching == "crossover" ? Branching::CrossoverDichotomy : Branching::MostFractional;
    o.M_override = big_m;
    return o;
  }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void print_summary(std::ostream& os, const SolveReport& r) {
  os << "objective " << std::setprecision(10) << r.objective << "  kind " << to_string(r.best_spline.kind)
     << "  knot ";
  if (r.best_spline.knot) os << *r.best_spline.knot;
  else os << "N/A";
  os << "  winner " << to_string(r.winner) << "  status " << to_string(r.status) << "  certificate "
     << to_string(r.certificate.branch) << "  bigM_audit " << (r.bigM_audit ? "pass" : "fail") << '\n';
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
}

/// Expands --config FILE into flags that are not already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  std::string path;
  if (it != args.end()) {
    if (it + 1 == args.end()) throw CLI::ArgumentMismatch("--config requires a file");
    path = *(it + 1);
    args.erase(it, it + 2);
  } else {
    for (auto j = args.begin(); j != args.end(); ++j) {
      if (j->rfind("--config=", 0) == 0) {
        path = j->substr(9);
        args.erase(j);
        break;
      }
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw CLI::ValidationError("--config", "expected key=value: " + line);
    const std::string key = "--" + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == key || a.rfind(key + "=", 0) == 0;
    });
    if (given) continue;
    if (value == "true") extra.push_back(key);
    else if (value != "false") extra.push_back(key + "=" + value);
  }
  // Config flags go right after the subcommand name.
  args.insert(args.begin() + std::min<std::size_t>(1, args.size()), extra.begin(), extra.end());
  return args;
}

int cmd_solve(const DataArgs& data_args, const SolverArgs& solver, const std::string& out, const std::string& fig,
              bool emit_table) {
  const SampledFunction data = data_args.load();
  std::ofstream report_file = open_output(out);
  std::optional<std::ofstream> fig_file;
  if (!fig.empty()) fig_file = open_output(fig);

  const SolveReport r = solve_one_knot(data, solver.options());
  report_file << to_json(r, data).dump(2) << '\n';
  if (fig_file) write_figure_csv(*fig_file, data, r.best_spline);
  print_summary(std::cout, r);
  if (emit_table) std::cout << render_table({table_row(r, data.label)});
  return r.status == MilpStatus::Optimal ? kExitOk : kExitLimit;
}

int cmd_bench(double h, const SolverArgs& solver, const std::string& out_dir, bool oracle, std::size_t threads) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ofstream table_file = open_output(dir / "table.txt");
  std::ofstream report_file = open_output(dir / "report.json");

  constexpr std::size_t count = std::size(kAllBenchmarks);
  struct Result {
    SampledFunction data;
    std::optional<SolveReport> report;
    std::optional<double> oracle_objective;
    std::string error;
  };
  std::vector<Result> results(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      const BenchmarkId id = kAllBenchmarks[k];
      Result& res = results[k];
      try {
        res.data = sample(id, make_grid(-1.0, 1.0, h));
        BnbOptions o = solver.options();
        if (!o.M_override) o.M_override = table_big_m(id);
        res.report = solve_one_knot(res.data, o);
        if (oracle) res.oracle_objective = oracle_enumerate(res.data, o.M_override).objective;
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, count);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool failed = false;
  std::vector<TableRow> rows;
  Json reports = Json::array();
  for (std::size_t k = 0; k < count; ++k) {
    const std::string name(to_string(kAllBenchmarks[k]));
    Result& res = results[k];
    if (!res.report) {
      failed = true;
      TableRow row;
      row.function = name;
      row.failed = true;
      row.note = res.error;
      rows.push_back(row);
      continue;
    }
    TableRow row = table_row(*res.report, name);
    Json j = to_json(*res.report, res.data);
    if (res.oracle_objective) {
      const double diff = std::abs(*res.oracle_objective - res.report->objective);
      j["oracle_objective"] = *res.oracle_objective;
      row.note += (row.note.empty() ? "" : "; ") + std::string("oracle ") + (diff <= 1e-6 ? "agrees" : "DISAGREES");
      if (diff > 1e-6) row.failed = true;
    }
    failed = failed || row.failed;
    rows.push_back(row);
    reports.push_back(j);
    std::ofstream fig = open_output(dir / ("fig_" + name + ".csv"));
    write_figure_csv(fig, res.data, res.report->best_spline);
  }
  const std::string table = render_table(rows);
  table_file << table;
  report_file << reports.dump(2) << '\n';
  std::cout << table;
  return failed ? kExitLimit : kExitOk;
}

int cmd_train(const DataArgs& data_args, const SolverArgs& solver, TrainConfig cfg, std::optional<std::size_t> epochs,
              std::size_t hidden, const std::string& optimizer, const std::string& out_dir, bool milp) {
  const SampledFunction data = data_args.load();
  const auto id = data_args.benchmark();
  cfg.epochs = epochs ? *epochs : (id ? table_epochs(*id) : 50);
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  std::vector<Optimizer> runs;
  if (optimizer == "adam" || optimizer == "both") runs.push_back(Optimizer::Adam);
  if (optimizer == "adamax" || optimizer == "both") runs.push_back(Optimizer::Adamax);

  std::cout << std::left << std::setw(10) << "method" << std::right << std::setw(12) << "knot" << std::setw(16)
            << "max. abs. dev." << std::setw(10) << "time" << '\n';
  auto print_row = [](const std::string& method, const std::vector<double>& knots, double dev, double time) {
    std::ostringstream k;
    if (knots.empty()) k << "N/A";
    for (std::size_t i = 0; i < knots.size(); ++i) k << (i ? "," : "") << std::fixed << std::setprecision(3) << knots[i];
    std::cout << std::left << std::setw(10) << method << std::right << std::setw(12) << k.str() << std::setw(16)
              << std::fixed << std::setprecision(6) << dev << std::setw(10) << std::setprecision(2) << time << '\n';
    std::cout.unsetf(std::ios::fixed);
  };

  if (milp) {
    BnbOptions o = solver.options();
    if (!o.M_override && id) o.M_override = table_big_m(*id);
    const SolveReport r = solve_one_knot(data, o);
    std::vector<double> knots;
    if (r.best_spline.knot) knots.push_back(*r.best_spline.knot);
    print_row("milp", knots, r.objective, r.wall_time);
  }
  for (Optimizer opt : runs) {
    cfg.optimizer = opt;
    const std::string name = to_string(opt);
    std::ofstream history_file = open_output(dir / ("history_" + name + ".csv"));
    std::ofstream net_file = open_output(dir / ("net_" + name + ".json"));
    try {
      const auto [net, h] = train(init_net(hidden, cfg.seed), data, cfg);
      write_history_csv(history_file, h);
      net_file << to_json(net).dump(2) << '\n';
      print_row(name, extract_knots(net, data.grid.c, data.grid.d), h.final_loss, h.wall_time);
    } catch (const DivergenceError& e) {
      std::cout << name << ": diverged at epoch " << e.epoch() << '\n';
      return kExitDiverged;
    }
  }
  return kExitOk;
}

int cmd_check(const DataArgs& data_args, const std::string& spline_path, double tau) {
  SplineFile file;
  {
    std::ifstream in(spline_path);
    if (!in) throw ParseError("cannot open " + spline_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ParseError(std::string("spline JSON: ") + e.what());
    }
    // A full solve report is accepted as well as a bare spline.
    file = spline_from_json(j.contains("best_spline") ? j["best_spline"] : j);
  }
  DataArgs args = data_args;
  if (args.csv.empty()) {
    args.c = file.c;
    args.d = file.d;
  }
  const SampledFunction data = args.load();
  const OptimalityVerdict v = check_sufficient(data, file.spline, tau);
  std::cout << to_json(v).dump(2) << '\n';
  return v.sufficient_met ? kExitOk : kExitNotMet;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-knot Chebyshev spline fitting by mixed-integer programming"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  DataArgs data;
  SolverArgs solver;

  auto* solve = app.add_subcommand("solve", "solve one problem and write a JSON report");
  std::string out = "report.json", fig;
  bool emit_table = false;
  data.add(solve);
  solver.add(solve);
  solve->add_option("--out", out, "report path");
  solve->add_option("--fig", fig, "figure CSV path (t,f,s,residual)");
  solve->add_flag("--emit-table", emit_table, "print the results table row");

  auto* bench = app.add_subcommand("bench", "run the five benchmark functions");
  double bench_h = 1e-3;
  std::string out_dir = ".";
  bool oracle = false;
  std::size_t threads = 0;
  bench->add_option("--h", bench_h, "grid step");
  solver.add(bench);
  bench->add_option("--out-dir", out_dir, "output directory");
  bench->add_flag("--oracle", oracle, "cross-check every row with crossover enumeration");
  bench->add_option("--threads", threads, "worker threads (default FREEKNOT_THREADS or hardware)");

  auto* trainc = app.add_subcommand("train", "train one-node ReLU networks with ADAM and ADAMAX");
  TrainConfig cfg;
  std::optional<std::size_t> epochs;
  std::size_t hidden = 1;
  std::string optimizer = "both";
  bool no_milp = false;
  data.add(trainc);
  solver.add(trainc);
  trainc->add_option("--epochs", epochs, "optimizer steps (default by function)");
  trainc->add_option("--lr", cfg.learning_rate, "learning rate");
  trainc->add_option("--beta1", cfg.beta1, "first moment decay");
  trainc->add_option("--beta2", cfg.beta2, "second moment decay");
  trainc->add_option("--eps", cfg.epsilon, "denominator offset");
  trainc->add_option("--seed", cfg.seed, "initialization seed");
  trainc->add_option("--hidden", hidden, "hidden nodes")->check(CLI::PositiveNumber);
  trainc->add_option("--optimizer", optimizer, "adam, adamax or both")
      ->check(CLI::IsMember({"adam", "adamax", "both"}));
  trainc->add_option("--out-dir", out_dir, "output directory");
  trainc->add_flag("--no-milp", no_milp, "skip the reference MILP solve");

  auto* check = app.add_subcommand("check", "test the sufficient optimality condition for a spline");
  std::string spline_path;
  double tau = kDefaultTauAlt;
  data.add(check);
  check->add_option("--spline", spline_path, "spline or report JSON")->required();
  check->add_option("--tau", tau, "relative tolerance for extreme points");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(data, solver, out, fig, emit_table);
    if (*bench) {
      if (threads == 0) {
        if (const char* env = std::getenv("FREEKNOT_THREADS")) threads = std::strtoul(env, nullptr, 10);
        if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
      }
      return cmd_bench(bench_h, solver, out_dir, oracle, threads);
    }
    if (*trainc) return cmd_train(data, solver, cfg, epochs, hidden, optimizer, out_dir, !no_milp);
    if (*check) {
      try {
        return cmd_check(data, spline_path, tau);
      } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
