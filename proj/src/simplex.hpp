#pragma once

// Bounded-variable simplex over the computational form
//   A x - s = 0,  lower <= (x, s) <= upper,
// where every row owns a logical variable s carrying the row's bounds. The
// basis inverse is kept dense; problems handled here have at most a few
// hundred rows.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "l0erm/milp.hpp"

namespace l0erm::milp::detail {

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

struct Basis {
  std::vector<int> head;             // variable basic in each row position
  std::vector<VarStatus> status;     // per variable (structural then logical)
};

class BoundedSimplex {
 public:
  BoundedSimplex(const MilpProblem& problem, const SimplexOptions& options);

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }

  void set_bounds(int j, double lower, double upper);
  double lower(int j) const { return lb_[j]; }
  double upper(int j) const { return ub_[j]; }

  // Reoptimizes from the current basis.
  LpStatus solve();

  std::span<const double> structural_values() const { return {x_.data(), static_cast<std::size_t>(n_)}; }
  double objective() const;
  std::int64_t iterations() const { return iterations_; }

  Basis basis() const { return {head_, status_}; }
  void set_basis(const Basis& basis);
  void reset_to_slack_basis();

 private:
  enum class Outcome { kOptimal, kInfeasible, kUnbounded, kNeedPrimal };

  int total() const { return n_ + m_; }
  bool is_fixed(int j) const { return lb_[j] == ub_[j]; }
  double nonbasic_value(int j) const;
  void place_nonbasic(int j);

  bool refactor();
  void compute_primal();
  void compute_duals(const Eigen::VectorXd& basic_costs);
  void ftran(int j, Eigen::VectorXd& out) const;
  double row_dot(const Eigen::VectorXd& rho, int j) const;
  void pivot(int row, int entering, const Eigen::VectorXd& column);
  void maybe_refactor();

  double infeasibility(int j) const;
  Outcome run_dual();
  Outcome run_primal();

  SimplexOptions opt_;
  int m_ = 0;
  int n_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> cost_;
  std::vector<double> lb_;
  std::vector<double> ub_;

  std::vector<int> head_;
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  std::vector<double> d_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd y_;
  int pivots_since_refactor_ = 0;
  bool factored_ = false;
  std::int64_t iterations_ = 0;
};

}  // namespace l0erm::milp::detail
