#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace l0erm::milp::detail {
namespace {

constexpr double kSingularRcond = 1e-13;

}  // namespace

BoundedSimplex::BoundedSimplex(const MilpProblem& problem, const SimplexOptions& options)
    : opt_(options), m_(problem.num_constraints()), n_(problem.num_vars()) {
  cols_.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : problem.constraints[static_cast<std::size_t>(i)].terms) {
      if (t.coef != 0.0) cols_[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);
    }
  }
  const int nt = total();
  cost_.assign(static_cast<std::size_t>(nt), 0.0);
  lb_.assign(static_cast<std::size_t>(nt), 0.0);
  ub_.assign(static_cast<std::size_t>(nt), 0.0);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = problem.objective[j];
    lb_[j] = problem.var_lower[j];
    ub_[j] = problem.var_upper[j];
  }
  for (int i = 0; i < m_; ++i) {
    const Constraint& c = problem.constraints[static_cast<std::size_t>(i)];
    const int s = n_ + i;
    switch (c.sense) {
      case Sense::kLessEqual:
        lb_[s] = -kInf;
        ub_[s] = c.rhs;
        break;
      case Sense::kGreaterEqual:
        lb_[s] = c.rhs;
        ub_[s] = kInf;
        break;
      case Sense::kEqual:
        lb_[s] = ub_[s] = c.rhs;
        break;
    }
  }
  x_.assign(static_cast<std::size_t>(nt), 0.0);
  d_.assign(static_cast<std::size_t>(nt), 0.0);
  reset_to_slack_basis();
}

double BoundedSimplex::nonbasic_value(int j) const {
  switch (status_[j]) {
    case VarStatus::kAtLower: return lb_[j];
    case VarStatus::kAtUpper: return ub_[j];
    default: return 0.0;
  }
}

// Picks a bound for a nonbasic variable; boxed variables go to the bound
// favoured by their cost so that the slack basis starts dual feasible.
void BoundedSimplex::place_nonbasic(int j) {
  const bool lo = std::isfinite(lb_[j]);
  const bool hi = std::isfinite(ub_[j]);
  if (lo && hi) {
    status_[j] = cost_[j] < 0.0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
  } else if (lo) {
    status_[j] = VarStatus::kAtLower;
  } else if (hi) {
    status_[j] = VarStatus::kAtUpper;
  } else {
    status_[j] = VarStatus::kFree;
  }
}

void BoundedSimplex::reset_to_slack_basis() {
  head_.resize(static_cast<std::size_t>(m_));
  status_.assign(static_cast<std::size_t>(total()), VarStatus::kAtLower);
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    status_[n_ + i] = VarStatus::kBasic;
  }
  binv_ = -Eigen::MatrixXd::Identity(m_, m_);
  pivots_since_refactor_ = 0;
  factored_ = true;
}

void BoundedSimplex::set_bounds(int j, double lower, double upper) {
  lb_[j] = lower;
  ub_[j] = upper;
  const VarStatus s = status_[j];
  if (s == VarStatus::kBasic) return;
  const bool lo = std::isfinite(lower);
  const bool hi = std::isfinite(upper);
  if (s == VarStatus::kAtLower && !lo) {
    status_[j] = hi ? VarStatus::kAtUpper : VarStatus::kFree;
  } else if (s == VarStatus::kAtUpper && !hi) {
    status_[j] = lo ? VarStatus::kAtLower : VarStatus::kFree;
  } else if (s == VarStatus::kFree && (lo || hi)) {
    status_[j] = lo ? VarStatus::kAtLower : VarStatus::kAtUpper;
  }
}

void BoundedSimplex::set_basis(const Basis& basis) {
  head_ = basis.head;
  status_ = basis.status;
  for (int j = 0; j < total(); ++j) {
    if (status_[j] != VarStatus::kBasic) set_bounds(j, lb_[j], ub_[j]);
  }
  factored_ = false;
}

double BoundedSimplex::objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

bool BoundedSimplex::refactor() {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    if (j < n_) {
      for (const auto& [i, v] : cols_[j]) b(i, r) += v;
    } else {
      b(j - n_, r) = -1.0;
    }
  }
  if (m_ == 0) {
    binv_.resize(0, 0);
    factored_ = true;
    return true;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  if (!(lu.rcond() > kSingularRcond)) return false;
  binv_ = lu.inverse();
  pivots_since_refactor_ = 0;
  factored_ = true;
  return true;
}

void BoundedSimplex::compute_primal() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < total(); ++j) {
    if (status_[j] == VarStatus::kBasic) continue;
    const double v = nonbasic_value(j);
    x_[j] = v;
    if (v == 0.0) continue;
    if (j < n_) {
      for (const auto& [i, a] : cols_[j]) rhs[i] -= a * v;
    } else {
      rhs[j - n_] += v;
    }
  }
  const Eigen::VectorXd xb = binv_ * rhs;
  for (int r = 0; r < m_; ++r) x_[head_[r]] = xb[r];
}

void BoundedSimplex::compute_duals(const Eigen::VectorXd& basic_costs) {
  y_.noalias() = binv_.transpose() * basic_costs;
}

void BoundedSimplex::ftran(int j, Eigen::VectorXd& out) const {
  if (j < n_) {
    out.setZero(m_);
    for (const auto& [i, v] : cols_[j]) out.noalias() += v * binv_.col(i);
  } else {
    out = -binv_.col(j - n_);
  }
}

double BoundedSimplex::row_dot(const Eigen::VectorXd& rho, int j) const {
  if (j >= n_) return -rho[j - n_];
  double s = 0.0;
  for (const auto& [i, v] : cols_[j]) s += rho[i] * v;
  return s;
}

void BoundedSimplex::pivot(int row, int entering, const Eigen::VectorXd& column) {
  const double piv = column[row];
  const Eigen::RowVectorXd prow = binv_.row(row) / piv;
  Eigen::VectorXd c = column;
  c[row] = 0.0;
  binv_.noalias() -= c * prow;
  binv_.row(row) = prow;
  const int leaving = head_[row];
  head_[row] = entering;
  status_[entering] = VarStatus::kBasic;
  (void)leaving;
  ++pivots_since_refactor_;
}

void BoundedSimplex::maybe_refactor() {
  if (pivots_since_refactor_ < opt_.refactor_interval) return;
  if (!refactor()) reset_to_slack_basis();
  compute_primal();
}

double BoundedSimplex::infeasibility(int j) const {
  if (x_[j] < lb_[j]) return lb_[j] - x_[j];
  if (x_[j] > ub_[j]) return x_[j] - ub_[j];
  return 0.0;
}

BoundedSimplex::Outcome BoundedSimplex::run_dual() {
  const std::int64_t cap = 20000 + 50LL * total();
  std::int64_t local = 0;
  int degenerate = 0;
  bool bland = false;
  Eigen::VectorXd cb(m_);
  Eigen::VectorXd column(m_);
  std::vector<std::pair<int, double>> candidates;

  while (true) {
    if (++local > cap) throw SolverFailure("dual simplex iteration limit reached");
    maybe_refactor();
    for (int r = 0; r < m_; ++r) cb[r] = cost_[head_[r]];
    compute_duals(cb);

    bool flipped = false;
    for (int j = 0; j < total(); ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic) {
        d_[j] = 0.0;
        continue;
      }
      d_[j] = cost_[j] - row_dot(y_, j);
      if (is_fixed(j)) continue;
      if (s == VarStatus::kAtLower && d_[j] < -opt_.dual_tol) {
        if (!std::isfinite(ub_[j])) return Outcome::kNeedPrimal;
        status_[j] = VarStatus::kAtUpper;
        flipped = true;
      } else if (s == VarStatus::kAtUpper && d_[j] > opt_.dual_tol) {
        if (!std::isfinite(lb_[j])) return Outcome::kNeedPrimal;
        status_[j] = VarStatus::kAtLower;
        flipped = true;
      } else if (s == VarStatus::kFree && std::abs(d_[j]) > opt_.dual_tol) {
        return Outcome::kNeedPrimal;
      }
    }
    if (flipped) compute_primal();

    int row = -1;
    double worst = opt_.primal_tol;
    for (int r = 0; r < m_; ++r) {
      const double inf = infeasibility(head_[r]);
      if (inf <= opt_.primal_tol) continue;
      if (bland) {
        if (row < 0 || head_[r] < head_[row]) row = r;
      } else if (inf > worst) {
        worst = inf;
        row = r;
      }
    }
    if (row < 0) return Outcome::kOptimal;

    const int leaving = head_[row];
    const bool below = x_[leaving] < lb_[leaving];
    const Eigen::VectorXd rho = binv_.row(row).transpose();

    candidates.clear();
    double harris = kInf;
    for (int j = 0; j < total(); ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || is_fixed(j)) continue;
      const double a = row_dot(rho, j);
      if (std::abs(a) <= opt_.pivot_tol) continue;
      bool ok = false;
      if (s == VarStatus::kFree) {
        ok = true;
      } else if (below) {
        ok = (s == VarStatus::kAtLower && a < 0.0) || (s == VarStatus::kAtUpper && a > 0.0);
      } else {
        ok = (s == VarStatus::kAtLower && a > 0.0) || (s == VarStatus::kAtUpper && a < 0.0);
      }
      if (!ok) continue;
      candidates.emplace_back(j, a);
      harris = std::min(harris, (std::abs(d_[j]) + opt_.dual_tol) / std::abs(a));
    }
    if (candidates.empty()) return Outcome::kInfeasible;

    int entering = -1;
    double best_alpha = 0.0;
    double best_ratio = kInf;
    for (const auto& [j, a] : candidates) {
      const double ratio = std::abs(d_[j]) / std::abs(a);
      if (bland) {
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && j < entering)) {
          best_ratio = std::min(best_ratio, ratio);
          entering = j;
        }
      } else if (ratio <= harris && std::abs(a) > best_alpha) {
        best_alpha = std::abs(a);
        best_ratio = ratio;
        entering = j;
      }
    }

    ftran(entering, column);
    const double piv = column[row];
    if (std::abs(piv) <= opt_.pivot_tol) {
      // Row and column computations disagree; refresh the factorization.
      if (!refactor()) reset_to_slack_basis();
      compute_primal();
      continue;
    }
    const double target = below ? lb_[leaving] : ub_[leaving];
    const double delta = (x_[leaving] - target) / piv;
    for (int r = 0; r < m_; ++r) x_[head_[r]] -= column[r] * delta;
    x_[entering] += delta;
    x_[leaving] = target;
    status_[leaving] = below ? VarStatus::kAtLower : VarStatus::kAtUpper;
    pivot(row, entering, column);
    ++iterations_;

    if (best_ratio <= 1e-12) {
      if (++degenerate > opt_.stall_threshold) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
  }
}

BoundedSimplex::Outcome BoundedSimplex::run_primal() {
  const std::int64_t cap = 20000 + 50LL * total();
  std::int64_t local = 0;
  int degenerate = 0;
  bool bland = false;
  Eigen::VectorXd cb(m_);
  Eigen::VectorXd column(m_);

  while (true) {
    if (++local > cap) throw SolverFailure("primal simplex iteration limit reached");
    maybe_refactor();

    bool phase1 = false;
    for (int r = 0; r < m_; ++r) {
      const int v = head_[r];
      if (x_[v] < lb_[v] - opt_.primal_tol) {
        cb[r] = -1.0;
        phase1 = true;
      } else if (x_[v] > ub_[v] + opt_.primal_tol) {
        cb[r] = 1.0;
        phase1 = true;
      } else {
        cb[r] = 0.0;
      }
    }
    if (!phase1) {
      for (int r = 0; r < m_; ++r) cb[r] = cost_[head_[r]];
    }
    compute_duals(cb);

    int entering = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < total(); ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || is_fixed(j)) continue;
      const double dj = (phase1 ? 0.0 : cost_[j]) - row_dot(y_, j);
      int want = 0;
      if ((s == VarStatus::kAtLower || s == VarStatus::kFree) && dj < -opt_.dual_tol) want = 1;
      if ((s == VarStatus::kAtUpper || s == VarStatus::kFree) && dj > opt_.dual_tol) want = -1;
      if (want == 0) continue;
      if (bland) {
        entering = j;
        dir = want;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        entering = j;
        dir = want;
      }
    }
    if (entering < 0) return phase1 ? Outcome::kInfeasible : Outcome::kOptimal;

    ftran(entering, column);
    const double range = ub_[entering] - lb_[entering];

    // Two-pass (Harris) ratio test; in phase 1 an infeasible basic variable
    // blocks where it reaches its violated bound.
    double harris = kInf;
    for (int r = 0; r < m_; ++r) {
      const double a = column[r];
      if (std::abs(a) <= opt_.pivot_tol) continue;
      const int v = head_[r];
      const double rate = -a * dir;
      double limit = kInf;
      double slack = 0.0;
      if (rate > 0.0) {
        if (phase1 && x_[v] < lb_[v] - opt_.primal_tol) limit = lb_[v];
        else if (x_[v] <= ub_[v] + opt_.primal_tol) limit = ub_[v];
        slack = opt_.primal_tol;
      } else {
        if (phase1 && x_[v] > ub_[v] + opt_.primal_tol) limit = ub_[v];
        else if (x_[v] >= lb_[v] - opt_.primal_tol) limit = lb_[v];
        slack = -opt_.primal_tol;
      }
      if (!std::isfinite(limit)) continue;
      harris = std::min(harris, (limit + slack - x_[v]) / rate);
    }

    int row = -1;
    double row_limit = 0.0;
    double step = kInf;
    double best_alpha = 0.0;
    if (std::isfinite(harris)) {
      for (int r = 0; r < m_; ++r) {
        const double a = column[r];
        if (std::abs(a) <= opt_.pivot_tol) continue;
        const int v = head_[r];
        const double rate = -a * dir;
        double limit = kInf;
        if (rate > 0.0) {
          if (phase1 && x_[v] < lb_[v] - opt_.primal_tol) limit = lb_[v];
          else if (x_[v] <= ub_[v] + opt_.primal_tol) limit = ub_[v];
        } else {
          if (phase1 && x_[v] > ub_[v] + opt_.primal_tol) limit = ub_[v];
          else if (x_[v] >= lb_[v] - opt_.primal_tol) limit = lb_[v];
        }
        if (!std::isfinite(limit)) continue;
        const double t = std::max(0.0, (limit - x_[v]) / rate);
        if (t > harris) continue;
        const bool better = bland ? (row < 0 || t < step - 1e-12 ||
                                     (t <= step + 1e-12 && v < head_[row]))
                                  : std::abs(a) > best_alpha;
        if (better) {
          row = r;
          row_limit = limit;
          step = t;
          best_alpha = std::abs(a);
        }
      }
    }

    if (row < 0 && !std::isfinite(range)) {
      if (phase1) throw SolverFailure("phase 1 ray without breakpoint (numerical trouble)");
      return Outcome::kUnbounded;
    }

    if (row < 0 || range <= step) {
      // Bound flip of the entering variable; the basis is unchanged.
      for (int r = 0; r < m_; ++r) x_[head_[r]] += -column[r] * dir * range;
      if (status_[entering] == VarStatus::kAtLower) {
        status_[entering] = VarStatus::kAtUpper;
      } else {
        status_[entering] = VarStatus::kAtLower;
      }
      x_[entering] = nonbasic_value(entering);
      ++iterations_;
      degenerate = 0;
      continue;
    }

    const int leaving = head_[row];
    for (int r = 0; r < m_; ++r) x_[head_[r]] += -column[r] * dir * step;
    x_[entering] += dir * step;
    x_[leaving] = row_limit;
    status_[leaving] = row_limit == lb_[leaving] ? VarStatus::kAtLower : VarStatus::kAtUpper;
    pivot(row, entering, column);
    ++iterations_;

    if (step <= 1e-12) {
      if (++degenerate > opt_.stall_threshold) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
  }
}

LpStatus BoundedSimplex::solve() {
  if (!factored_ && !refactor()) reset_to_slack_basis();
  compute_primal();
  for (int attempt = 0; attempt < 6; ++attempt) {
    Outcome out = run_dual();
    if (out == Outcome::kNeedPrimal) out = run_primal();
    if (out == Outcome::kInfeasible) return LpStatus::kInfeasible;
    if (out == Outcome::kUnbounded) return LpStatus::kUnbounded;

    // Confirm optimality against a fresh factorization.
    if (!refactor()) {
      reset_to_slack_basis();
      compute_primal();
      continue;
    }
    compute_primal();
    bool primal_ok = true;
    for (int r = 0; r < m_ && primal_ok; ++r) {
      if (infeasibility(head_[r]) > opt_.primal_tol) primal_ok = false;
    }
    if (!primal_ok) continue;
    Eigen::VectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb[r] = cost_[head_[r]];
    compute_duals(cb);
    bool dual_ok = true;
    for (int j = 0; j < total() && dual_ok; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || is_fixed(j)) continue;
      const double dj = cost_[j] - row_dot(y_, j);
      if ((s == VarStatus::kAtLower && dj < -opt_.dual_tol) ||
          (s == VarStatus::kAtUpper && dj > opt_.dual_tol) ||
          (s == VarStatus::kFree && std::abs(dj) > opt_.dual_tol)) {
        dual_ok = false;
      }
    }
    if (dual_ok) return LpStatus::kOptimal;
  }
  throw SolverFailure("simplex could not confirm an optimal basis after " +
                      std::to_string(6) + " refactorizations");
}

}  // namespace l0erm::milp::detail
