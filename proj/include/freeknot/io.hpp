#pragma once

// JSON and CSV serialization of data, splines, reports and networks, and the
// text results table.

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeknot/bnb.hpp"
#include "freeknot/cheb.hpp"
#include "freeknot/error.hpp"
#include "freeknot/funcs.hpp"
#include "freeknot/neural.hpp"
#include "freeknot/relu_net.hpp"
#include "freeknot/spline.hpp"

namespace freeknot {

using Json = nlohmann::ordered_json;

inline Json to_json(const OneKnotSpline& s, double c, double d) {
  Json j;
  j["kind"] = to_string(s.kind);
  Json pieces = Json::array();
  pieces.push_back({{"slope", s.piece1.slope}, {"intercept", s.piece1.intercept}});
  if (s.kind != SplineKind::Single) pieces.push_back({{"slope", s.piece2.slope}, {"intercept", s.piece2.intercept}});
  j["pieces"] = pieces;
  j["knot"] = s.knot ? Json(*s.knot) : Json(nullptr);
  j["interval"] = {c, d};
  return j;
}

struct SplineFile {
  OneKnotSpline spline;
  double c = 0.0, d = 0.0;
};

/// Parses the spline JSON written by to_json. The knot is recomputed from the pieces.
inline SplineFile spline_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const Json& pieces = j.at("pieces");
    const Json& interval = j.at("interval");
    if (!pieces.is_array() || pieces.empty() || !interval.is_array() || interval.size() != 2)
      throw ParseError("spline JSON: malformed pieces or interval");
    SplineFile out;
    out.c = interval[0].get<double>();
    out.d = interval[1].get<double>();
    if (!(out.c < out.d)) throw ParseError("spline JSON: interval must satisfy c < d");
    auto piece = [](const Json& p) {
      const AffinePiece a{p.at("slope").get<double>(), p.at("intercept").get<double>()};
      if (!std::isfinite(a.slope) || !std::isfinite(a.intercept)) throw ParseError("spline JSON: non-finite piece");
      return a;
    };
    if (kind == "single") {
      out.spline = OneKnotSpline::single(piece(pieces[0]));
    } else if (kind == "max" || kind == "min") {
      if (pieces.size() != 2) throw ParseError("spline JSON: two pieces required for kind " + kind);
      out.spline = OneKnotSpline::combine(piece(pieces[0]), piece(pieces[1]),
                                          kind == "max" ? SplineKind::MaxOfTwo : SplineKind::MinOfTwo, out.c, out.d);
    } else {
      throw ParseError("spline JSON: unknown kind '" + kind + "'");
    }
    return out;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("spline JSON: ") + e.what());
  }
}

inline SplineFile spline_from_json_text(std::istream& in) {
  try {
    return spline_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("spline JSON: ") + e.what());
  }
}

inline Json to_json(const AlternationReport& r) {
  Json j;
  j["tolerance"] = r.tolerance;
  j["sup"] = r.sup;
  j["extreme_indices"] = r.extreme_indices;
  j["longest_alternating"] = r.longest_alternating;
  j["sequence_indices"] = r.sequence_indices;
  if (r.per_subinterval) j["per_subinterval"] = {r.per_subinterval->first, r.per_subinterval->second};
  else j["per_subinterval"] = nullptr;
  j["knot_point_shared"] = r.knot_point_shared;
  return j;
}

inline Json to_json(const OptimalityVerdict& v) {
  return {{"sufficient_met", v.sufficient_met}, {"branch", to_string(v.branch)}, {"details", to_json(v.details)}};
}

inline Json to_json(const SolveReport& r, const SampledFunction& data) {
  Json j;
  j["function"] = data.label;
  j["points"] = data.size();
  j["big_m"] = r.big_m;
  j["best_spline"] = to_json(r.best_spline, data.grid.c, data.grid.d);
  j["objective"] = r.objective;
  j["winner"] = to_string(r.winner);
  j["max_objective"] = r.max_objective;
  j["min_objective"] = r.min_objective;
  j["status"] = to_string(r.status);
  j["gap"] = r.gap;
  j["nodes"] = r.nodes;
  j["lp_pivots"] = r.lp_pivots;
  j["bigM_audit"] = r.bigM_audit ? "pass" : "fail";
  j["certificate"] = to_json(r.certificate);
  j["warnings"] = r.warnings;
  j["wall_time"] = r.wall_time;
  return j;
}

inline Json to_json(const ReluNet1& net) {
  return {{"w1", net.w1}, {"b1", net.b1}, {"w2", net.w2}, {"b2", net.b2}};
}

inline ReluNet1 net_from_json(const Json& j) {
  try {
    ReluNet1 net;
    net.w1 = j.at("w1").get<std::vector<double>>();
    net.b1 = j.at("b1").get<std::vector<double>>();
    net.w2 = j.at("w2").get<std::vector<double>>();
    net.b2 = j.at("b2").get<double>();
    net.validate();
    return net;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("network JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("network JSON: ") + e.what());
  }
}

/// CSV with header `t,f` and 17 significant digits.
inline void write_csv(std::ostream& os, const SampledFunction& data) {
  std::ostringstream buf;
  buf << std::setprecision(17) << "t,f\n";
  for (std::size_t j = 0; j < data.size(); ++j) buf << data.t(j) << ',' << data.f(j) << '\n';
  os << buf.str();
}

inline SampledFunction read_csv(std::istream& in, std::string label = "csv") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,f") throw ParseError("CSV: expected header 't,f'");
  std::vector<double> t, f;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("CSV: missing comma on line " + std::to_string(lineno));
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      t.push_back(std::stod(a, &used));
      if (used != a.size()) throw ParseError("");
      f.push_back(std::stod(b, &used));
      if (used != b.size()) throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError("CSV: bad number on line " + std::to_string(lineno));
    }
  }
  if (t.empty()) throw ParseError("CSV: no data rows");
  try {
    return make_sampled(std::move(t), std::move(f), std::move(label));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("CSV: ") + e.what());
  }
}

inline void write_history_csv(std::ostream& os, const TrainHistory& h) {
  std::ostringstream buf;
  buf << std::setprecision(17) << "epoch,loss\n";
  for (std::size_t k = 0; k < h.loss_per_epoch.size(); ++k) buf << k + 1 << ',' << h.loss_per_epoch[k] << '\n';
  os << buf.str();
}

/// Figure data: function, spline and residual per grid point.
template <class Spline>
void write_figure_csv(std::ostream& os, const SampledFunction& data, const Spline& s) {
  std::ostringstream buf;
  buf << std::setprecision(17) << "t,f,s,residual\n";
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double v = s(data.t(j));
    buf << data.t(j) << ',' << data.f(j) << ',' << v << ',' << data.f(j) - v << '\n';
  }
  os << buf.str();
}

struct TableRow {
  std::string function;
  double big_m = 0.0;
  std::optional<double> knot;
  double deviation = 0.0;
  std::string kind;  // "max", "min" or "one piece"
  double time = 0.0;
  bool failed = false;
  std::string note;
};

inline TableRow table_row(const SolveReport& r, const std::string& function) {
  TableRow row;
  row.function = function;
  row.big_m = r.big_m;
  row.knot = r.best_spline.knot;
  row.deviation = r.objective;
  row.kind = r.best_spline.kind == SplineKind::Single ? "one piece" : to_string(r.best_spline.kind);
  row.time = r.wall_time;
  row.failed = r.status != MilpStatus::Optimal;
  if (row.failed) row.note = to_string(r.status);
  return row;
}

inline std::string render_table(const std::vector<TableRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(5) << "Fun" << std::right << std::setw(10) << "M" << std::setw(11) << "Knot"
     << std::setw(17) << "Max. abs. dev." << std::setw(12) << "max/min" << std::setw(11) << "Time" << '\n';
  for (const TableRow& r : rows) {
    std::ostringstream m, knot, dev, time;
    m << std::defaultfloat << std::setprecision(6) << r.big_m;
    if (r.knot) knot << std::fixed << std::setprecision(3) << (std::abs(*r.knot) < 5e-4 ? 0.0 : *r.knot);
    else knot << "N/A";
    dev << std::fixed << std::setprecision(3) << r.deviation;
    time << std::fixed << std::setprecision(2) << r.time;
    os << std::left << std::setw(5) << r.function << std::right << std::setw(10) << m.str() << std::setw(11)
       << (r.failed ? "FAILED" : knot.str()) << std::setw(17) << dev.str() << std::setw(12) << r.kind << std::setw(11)
       << time.str();
    if (!r.note.empty()) os << "  " << r.note;
    os << '\n';
  }
  return os.str();
}

}  // namespace freeknot
