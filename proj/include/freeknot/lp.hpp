#pragma once

// Bounded-variable primal simplex with a dense explicit basis inverse.
//
// Every row a.x (<=|=|>=) rhs gets a slack s with a.x + s = rhs, so the
// computational form is [A I] (x, s) = rhs with bounds on x and s. Phase 1
// adds artificial columns only for rows whose slack cannot absorb the initial
// residual.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freeknot/error.hpp"

namespace freeknot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LpRow {
  std::vector<std::pair<std::size_t, double>> coefs;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// minimize objective . x  subject to rows and lower <= x <= upper.
struct LpProblem {
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const noexcept { return objective.size(); }
  std::size_t num_rows() const noexcept { return rows.size(); }

  std::size_t add_variable(double cost, double lo = 0.0, double hi = kInf) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return objective.size() - 1;
  }

  void add_row(std::vector<std::pair<std::size_t, double>> coefs, Relation rel, double rhs) {
    rows.push_back(LpRow{std::move(coefs), rel, rhs});
  }

  void validate() const {
    const std::size_t n = num_vars();
    if (lower.size() != n || upper.size() != n) throw InvalidArgument("LpProblem: bound vectors have wrong length");
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(objective[j]) || std::isnan(lower[j]) || std::isnan(upper[j]))
        throw InvalidArgument("LpProblem: NaN in objective or bounds");
      if (lower[j] > upper[j]) throw InvalidArgument("LpProblem: lower bound exceeds upper bound");
      if (lower[j] == kInf || upper[j] == -kInf) throw InvalidArgument("LpProblem: empty bound interval");
    }
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw InvalidArgument("LpProblem: non-finite rhs");
      for (const auto& [j, v] : r.coefs) {
        if (j >= n) throw InvalidArgument("LpProblem: row references undefined column");
        if (!std::isfinite(v)) throw InvalidArgument("LpProblem: non-finite coefficient");
      }
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

/// Column ids: j < num_vars are structural, num_vars + r is the slack of row r.
struct LpBasis {
  std::vector<std::size_t> basic;
  std::vector<bool> at_upper;  // position of each nonbasic column
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective_value = 0.0;
  std::vector<double> x;
  LpBasis basis;
  std::vector<double> dual_values;  // one multiplier per row
  std::size_t pivots = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  std::size_t refactor_interval = 100;
  std::size_t max_pivots = 0;  // 0 selects a size-dependent limit
};

namespace detail {

class BoundedSimplex {
public:
  BoundedSimplex(const LpProblem& p, const LpOptions& opt) : p_(p), opt_(opt) {
    m_ = p.num_rows();
    n_ = p.num_vars();
    cols_.resize(n_ + m_);
    for (std::size_t r = 0; r < m_; ++r)
      for (const auto& [j, v] : p.rows[r].coefs)
        if (v != 0.0) cols_[j].push_back({r, v});
    for (std::size_t r = 0; r < m_; ++r) cols_[n_ + r].push_back({r, 1.0});
    lo_ = p.lower;
    up_ = p.upper;
    rhs_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      rhs_[r] = p.rows[r].rhs;
      switch (p.rows[r].relation) {
        case Relation::LessEqual: lo_.push_back(0.0); up_.push_back(kInf); break;
        case Relation::GreaterEqual: lo_.push_back(-kInf); up_.push_back(0.0); break;
        case Relation::Equal: lo_.push_back(0.0); up_.push_back(0.0); break;
      }
    }
    max_pivots_ = opt.max_pivots ? opt.max_pivots : 200 * (m_ + n_) + 10000;
    bland_threshold_ = 50 * (m_ + n_);
  }

  LpSolution solve(const std::optional<LpBasis>& warm) {
    bool started = warm && try_warm_start(*warm);
    if (!started) {
      cold_start();
      if (num_art_ > 0) {
        set_phase_costs(true);
        const LpStatus s1 = iterate();
        if (s1 != LpStatus::Optimal) throw InternalError("simplex: phase 1 did not terminate optimally");
        double infeas = 0.0;
        for (std::size_t k = n_ + m_; k < total(); ++k) infeas += x_[k];
        double scale = 1.0;
        for (double b : rhs_) scale = std::max(scale, std::abs(b));
        if (infeas > 1e-7 * scale) return finish(LpStatus::Infeasible);
        for (std::size_t k = n_ + m_; k < total(); ++k) up_[k] = 0.0;
        drive_out_artificials();
      }
    }
    set_phase_costs(false);
    return finish(iterate());
  }

private:
  struct Entry {
    std::size_t row;
    double value;
  };

  std::size_t total() const noexcept { return cols_.size(); }

  double initial_nonbasic_value(std::size_t j, bool upper) const {
    if (upper && std::isfinite(up_[j])) return up_[j];
    if (std::isfinite(lo_[j])) return lo_[j];
    if (std::isfinite(up_[j])) return up_[j];
    return 0.0;
  }

  void cold_start() {
    x_.assign(n_ + m_, 0.0);
    at_upper_.assign(n_ + m_, false);
    for (std::size_t j = 0; j < n_; ++j) {
      at_upper_[j] = !std::isfinite(lo_[j]) && std::isfinite(up_[j]);
      x_[j] = initial_nonbasic_value(j, at_upper_[j]);
    }
    std::vector<double> residual = rhs_;
    for (std::size_t j = 0; j < n_; ++j)
      if (x_[j] != 0.0)
        for (const auto& e : cols_[j]) residual[e.row] -= e.value * x_[j];

    basic_.assign(m_, 0);
    num_art_ = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t s = n_ + r;
      const double v = residual[r];
      if (v >= lo_[s] - opt_.feasibility_tol && v <= up_[s] + opt_.feasibility_tol) {
        basic_[r] = s;
        x_[s] = std::clamp(v, lo_[s], up_[s]);
        continue;
      }
      // Slack sits at its nearest bound, an artificial carries the remainder.
      const double bound = v < lo_[s] ? lo_[s] : up_[s];
      x_[s] = bound;
      at_upper_[s] = bound == up_[s] && bound != lo_[s];
      const double rest = v - bound;
      cols_.push_back({{r, rest > 0.0 ? 1.0 : -1.0}});
      lo_.push_back(0.0);
      up_.push_back(kInf);
      x_.push_back(std::abs(rest));
      at_upper_.push_back(false);
      basic_[r] = total() - 1;
      ++num_art_;
    }
    in_basis_.assign(total(), kNone);
    for (std::size_t r = 0; r < m_; ++r) in_basis_[basic_[r]] = r;
    refactor();
  }

  bool try_warm_start(const LpBasis& b) {
    if (b.basic.size() != m_ || b.at_upper.size() != n_ + m_) return false;
    std::vector<bool> seen(n_ + m_, false);
    for (std::size_t k : b.basic) {
      if (k >= n_ + m_ || seen[k]) return false;
      seen[k] = true;
    }
    basic_ = b.basic;
    num_art_ = 0;
    in_basis_.assign(n_ + m_, kNone);
    for (std::size_t r = 0; r < m_; ++r) in_basis_[basic_[r]] = r;
    x_.assign(n_ + m_, 0.0);
    at_upper_ = b.at_upper;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (in_basis_[j] != kNone) continue;
      x_[j] = initial_nonbasic_value(j, at_upper_[j]);
      at_upper_[j] = x_[j] == up_[j] && up_[j] != lo_[j];
    }
    if (!refactor(false)) return false;
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t k = basic_[r];
      if (x_[k] < lo_[k] - opt_.feasibility_tol || x_[k] > up_[k] + opt_.feasibility_tol) return false;
    }
    return true;
  }

  void set_phase_costs(bool phase1) {
    cost_.assign(total(), 0.0);
    if (phase1) {
      for (std::size_t k = n_ + m_; k < total(); ++k) cost_[k] = 1.0;
    } else {
      for (std::size_t j = 0; j < n_; ++j) cost_[j] = p_.objective[j];
    }
  }

  /// Rebuilds the basis inverse and the basic values. Returns false when the
  /// basis matrix is singular and `must_succeed` is false.
  bool refactor(bool must_succeed = true) {
    since_refactor_ = 0;
    if (m_ == 0) return true;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t r = 0; r < m_; ++r)
      for (const auto& e : cols_[basic_[r]])
        basis(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(r)) = e.value;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) {
      if (must_succeed) throw NumericError("simplex: singular basis at refactorization");
      return false;
    }
    binv_ = lu.inverse();
    recompute_basic_values();
    return true;
  }

  void recompute_basic_values() {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m_));
    for (std::size_t r = 0; r < m_; ++r) rhs(static_cast<Eigen::Index>(r)) = rhs_[r];
    for (std::size_t j = 0; j < total(); ++j) {
      if (in_basis_[j] != kNone || x_[j] == 0.0) continue;
      for (const auto& e : cols_[j]) rhs(static_cast<Eigen::Index>(e.row)) -= e.value * x_[j];
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (std::size_t r = 0; r < m_; ++r) x_[basic_[r]] = xb(static_cast<Eigen::Index>(r));
  }

  Eigen::VectorXd row_prices() const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t r = 0; r < m_; ++r) cb(static_cast<Eigen::Index>(r)) = cost_[basic_[r]];
    return binv_.transpose() * cb;
  }

  double reduced_cost(std::size_t j, const Eigen::VectorXd& y) const {
    double d = cost_[j];
    for (const auto& e : cols_[j]) d -= y(static_cast<Eigen::Index>(e.row)) * e.value;
    return d;
  }

  Eigen::VectorXd column_image(std::size_t j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (const auto& e : cols_[j]) a += binv_.col(static_cast<Eigen::Index>(e.row)) * e.value;
    return a;
  }

  LpStatus iterate() {
    bool just_refactored = false;
    while (true) {
      if (pivots_ >= max_pivots_) throw NumericError("simplex: pivot limit exceeded");
      if (since_refactor_ >= opt_.refactor_interval) refactor();

      const Eigen::VectorXd y = row_prices();
      std::size_t entering = kNone;
      double best = 0.0;
      int direction = 0;
      for (std::size_t j = 0; j < total(); ++j) {
        if (in_basis_[j] != kNone || lo_[j] == up_[j]) continue;
        const double d = reduced_cost(j, y);
        const bool free_var = !std::isfinite(lo_[j]) && !std::isfinite(up_[j]);
        int dir = 0;
        if (d < -opt_.optimality_tol && (!at_upper_[j] || free_var) && x_[j] < up_[j]) dir = 1;
        else if (d > opt_.optimality_tol && (at_upper_[j] || free_var) && x_[j] > lo_[j]) dir = -1;
        if (dir == 0) continue;
        if (bland_) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering == kNone) return LpStatus::Optimal;

      const Eigen::VectorXd alpha = column_image(entering);

      // Two-pass (Harris) ratio test over the basic variables.
      const double pivot_tol = 1e-9;
      double relaxed = kInf;
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = alpha(static_cast<Eigen::Index>(r));
        if (std::abs(a) <= pivot_tol) continue;
        const std::size_t k = basic_[r];
        const double rate = -direction * a;
        if (rate < 0.0 && std::isfinite(lo_[k]))
          relaxed = std::min(relaxed, (x_[k] - lo_[k] + opt_.feasibility_tol) / -rate);
        else if (rate > 0.0 && std::isfinite(up_[k]))
          relaxed = std::min(relaxed, (up_[k] - x_[k] + opt_.feasibility_tol) / rate);
      }
      std::size_t leave_row = kNone;
      double theta = kInf;
      double leave_mag = 0.0;
      if (std::isfinite(relaxed)) {
        for (std::size_t r = 0; r < m_; ++r) {
          const double a = alpha(static_cast<Eigen::Index>(r));
          if (std::abs(a) <= pivot_tol) continue;
          const std::size_t k = basic_[r];
          const double rate = -direction * a;
          double ratio = kInf;
          if (rate < 0.0 && std::isfinite(lo_[k])) ratio = (x_[k] - lo_[k]) / -rate;
          else if (rate > 0.0 && std::isfinite(up_[k])) ratio = (up_[k] - x_[k]) / rate;
          if (ratio > relaxed) continue;
          ratio = std::max(ratio, 0.0);
          const bool better = bland_ ? (leave_row == kNone || ratio < theta ||
                                        (ratio == theta && k < basic_[leave_row]))
                                     : std::abs(a) > leave_mag;
          if (better) {
            leave_row = r;
            theta = ratio;
            leave_mag = std::abs(a);
          }
        }
      }

      const double flip = up_[entering] - lo_[entering];
      if (std::isfinite(flip) && flip <= theta) {
        // Bound flip: the entering column crosses its whole range first.
        apply_step(entering, direction, flip, alpha);
        x_[entering] = direction > 0 ? up_[entering] : lo_[entering];
        at_upper_[entering] = direction > 0;
        ++pivots_;
        ++since_refactor_;
        just_refactored = false;
        continue;
      }
      if (leave_row == kNone) return LpStatus::Unbounded;

      if (leave_mag < 1e-11) {
        if (just_refactored) throw NumericError("simplex: pivot element below 1e-11 after refactorization");
        refactor();
        just_refactored = true;
        continue;
      }
      just_refactored = false;

      const std::size_t leaving = basic_[leave_row];
      const double rate = -direction * alpha(static_cast<Eigen::Index>(leave_row));
      apply_step(entering, direction, theta, alpha);
      x_[entering] += direction * theta;
      x_[leaving] = rate < 0.0 ? lo_[leaving] : up_[leaving];
      at_upper_[leaving] = rate > 0.0 && lo_[leaving] != up_[leaving];

      update_inverse(leave_row, alpha);
      in_basis_[leaving] = kNone;
      in_basis_[entering] = leave_row;
      basic_[leave_row] = entering;

      ++pivots_;
      ++since_refactor_;
      if (theta < 1e-12 && ++degenerate_ > bland_threshold_) bland_ = true;
    }
  }

  void apply_step(std::size_t /*entering*/, int direction, double theta, const Eigen::VectorXd& alpha) {
    for (std::size_t r = 0; r < m_; ++r) x_[basic_[r]] -= direction * theta * alpha(static_cast<Eigen::Index>(r));
  }

  void update_inverse(std::size_t pivot_row, const Eigen::VectorXd& alpha) {
    const auto pr = static_cast<Eigen::Index>(pivot_row);
    binv_.row(pr) /= alpha(pr);
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(m_); ++r)
      if (r != pr && alpha(r) != 0.0) binv_.row(r) -= alpha(r) * binv_.row(pr);
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basic_[r] < n_ + m_) continue;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (in_basis_[j] != kNone) continue;
        const Eigen::VectorXd alpha = column_image(j);
        if (std::abs(alpha(static_cast<Eigen::Index>(r))) < 1e-7) continue;
        const std::size_t leaving = basic_[r];
        update_inverse(r, alpha);
        in_basis_[leaving] = kNone;
        x_[leaving] = 0.0;
        in_basis_[j] = r;
        basic_[r] = j;
        recompute_basic_values();
        break;
      }
    }
  }

  LpSolution finish(LpStatus status) {
    LpSolution s;
    s.status = status;
    s.pivots = pivots_;
    s.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) s.objective_value += p_.objective[j] * s.x[j];
    if (status == LpStatus::Optimal) {
      const Eigen::VectorXd y = m_ ? row_prices() : Eigen::VectorXd();
      s.dual_values.resize(m_);
      for (std::size_t r = 0; r < m_; ++r) s.dual_values[r] = y(static_cast<Eigen::Index>(r));
    }
    s.basis.basic.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) s.basis.basic[r] = basic_[r] < n_ + m_ ? basic_[r] : n_ + r;
    s.basis.at_upper.assign(at_upper_.begin(), at_upper_.begin() + static_cast<std::ptrdiff_t>(n_ + m_));
    return s;
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  const LpProblem& p_;
  LpOptions opt_;
  std::size_t m_ = 0, n_ = 0, num_art_ = 0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> lo_, up_, rhs_, cost_, x_;
  std::vector<bool> at_upper_;
  std::vector<std::size_t> basic_, in_basis_;
  Eigen::MatrixXd binv_;
  std::size_t pivots_ = 0, since_refactor_ = 0, degenerate_ = 0;
  std::size_t max_pivots_ = 0, bland_threshold_ = 0;
  bool bland_ = false;
};

}  // namespace detail

/// Solves the LP with the two-phase bounded primal simplex. A warm basis from a
/// previous solve of the same problem skips phase 1 when it is primal feasible.
inline LpSolution lp_solve(const LpProblem& p, const std::optional<LpBasis>& warm = std::nullopt,
                           const LpOptions& opt = {}) {
  p.validate();
  detail::BoundedSimplex simplex(p, opt);
  return simplex.solve(warm);
}

/// Lagrangian dual bound of the LP for row multipliers y: a lower bound on the
/// optimum whenever finite. Reduced costs within `tol` of zero count as zero.
inline double lp_dual_bound(const LpProblem& p, std::span<const double> y, double tol = 1e-9) {
  if (y.size() != p.num_rows()) throw InvalidArgument("lp_dual_bound: multiplier count mismatch");
  double bound = 0.0;
  std::vector<double> d = p.objective;
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    bound += y[r] * p.rows[r].rhs;
    for (const auto& [j, v] : p.rows[r].coefs) d[j] -= y[r] * v;
    // Slack column +e_r with zero cost: reduced cost -y_r.
    const double ds = -y[r];
    if (std::abs(ds) <= tol) continue;
    const Relation rel = p.rows[r].relation;
    if (rel == Relation::Equal) continue;
    // <= rows: slack in [0, inf) needs ds >= 0; >= rows: slack in (-inf, 0] needs ds <= 0.
    if ((rel == Relation::LessEqual && ds < 0.0) || (rel == Relation::GreaterEqual && ds > 0.0)) return -kInf;
  }
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (std::abs(d[j]) <= tol) continue;
    const double b = d[j] > 0.0 ? p.lower[j] : p.upper[j];
    if (!std::isfinite(b)) return -kInf;
    bound += d[j] * b;
  }
  return bound;
}

/// Largest violation of rows and bounds at x.
inline double lp_primal_residual(const LpProblem& p, std::span<const double> x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    worst = std::max(worst, p.lower[j] - x[j]);
    worst = std::max(worst, x[j] - p.upper[j]);
  }
  for (const auto& r : p.rows) {
    double lhs = 0.0;
    for (const auto& [j, v] : r.coefs) lhs += v * x[j];
    const double gap = lhs - r.rhs;
    if (r.relation != Relation::GreaterEqual) worst = std::max(worst, gap);
    if (r.relation != Relation::LessEqual) worst = std::max(worst, -gap);
  }
  return worst;
}

/// Solves a tall LP (few variables, many rows) through its dual, whose basis
/// has one row per primal variable. Falls back to the primal simplex when the
/// dual is not optimal, so statuses keep their primal meaning.
inline LpSolution lp_solve_dual(const LpProblem& p, const LpOptions& opt = {}) {
  p.validate();
  const std::size_t n = p.num_vars();

  // Primal in the form  g_k . x >= h_k  (or = h_k), x free.
  struct DualColumn {
    std::size_t source;  // row index, or num_rows + 2j (+1) for bounds
    double sign;
    bool free;
  };
  LpProblem dual;
  std::vector<DualColumn> origin;
  std::vector<std::vector<std::pair<std::size_t, double>>> by_var(n);

  auto add_column = [&](const std::vector<std::pair<std::size_t, double>>& coefs, double sign, double rhs,
                        bool free, std::size_t source) {
    const std::size_t k = dual.add_variable(-sign * rhs, free ? -kInf : 0.0, kInf);
    for (const auto& [j, v] : coefs)
      if (v != 0.0) by_var[j].push_back({k, sign * v});
    origin.push_back({source, sign, free});
  };
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    const LpRow& row = p.rows[r];
    const double sign = row.relation == Relation::LessEqual ? -1.0 : 1.0;
    add_column(row.coefs, sign, row.rhs, row.relation == Relation::Equal, r);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(p.lower[j])) add_column({{j, 1.0}}, 1.0, p.lower[j], false, p.num_rows() + 2 * j);
    if (std::isfinite(p.upper[j])) add_column({{j, 1.0}}, -1.0, p.upper[j], false, p.num_rows() + 2 * j + 1);
  }
  for (std::size_t j = 0; j < n; ++j) dual.add_row(std::move(by_var[j]), Relation::Equal, p.objective[j]);

  LpSolution ds = lp_solve(dual, std::nullopt, opt);
  if (ds.status != LpStatus::Optimal) return lp_solve(p, std::nullopt, opt);

  LpSolution s;
  s.status = LpStatus::Optimal;
  s.pivots = ds.pivots;
  s.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) s.x[j] = -ds.dual_values[j];
  for (std::size_t j = 0; j < n; ++j) s.x[j] = std::clamp(s.x[j], p.lower[j], p.upper[j]);
  for (std::size_t j = 0; j < n; ++j) s.objective_value += p.objective[j] * s.x[j];
  s.dual_values.assign(p.num_rows(), 0.0);
  for (std::size_t k = 0; k < origin.size(); ++k)
    if (origin[k].source < p.num_rows()) s.dual_values[origin[k].source] = origin[k].sign * ds.x[k];

  double scale = 1.0;
  for (const auto& r : p.rows) scale = std::max(scale, std::abs(r.rhs));
  if (lp_primal_residual(p, s.x) > 1e-7 * scale) return lp_solve(p, std::nullopt, opt);
  return s;
}

}  // namespace freeknot
