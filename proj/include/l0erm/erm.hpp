#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0erm/core.hpp"
#include "l0erm/milp.hpp"

namespace l0erm {

inline constexpr double kDefaultDelta = 1e-6;

/// M_i = max over the box of |x1_i + xt_i' theta|, in closed form.
std::vector<double> big_m(const Dataset& data, const ParameterBox& box);

// The ERM mixed-integer model and where its variable groups live:
// theta_j at column j, d_i at p + i, e_j at p + n + j.
struct ErmModel {
  milp::MilpProblem problem;
  std::vector<double> big_m;
  std::size_t n = 0;
  std::size_t p = 0;

  int theta_var(std::size_t j) const { return static_cast<int>(j); }
  int d_var(std::size_t i) const { return static_cast<int>(p + i); }
  int e_var(std::size_t j) const { return static_cast<int>(p + n + j); }
};

// Penalized form: objective (1/n) sum_i [y_i - (2y_i - 1) d_i] + lambda sum_j e_j.
ErmModel build_penalized_milp(const Dataset& data, const ParameterBox& box, double lambda,
                              double delta = kDefaultDelta);

// Cardinality-constrained form: sum_j e_j <= max_features, objective is the risk only.
ErmModel build_constrained_milp(const Dataset& data, const ParameterBox& box, int max_features,
                                double delta = kDefaultDelta);

struct FitOptions {
  double delta = kDefaultDelta;
  milp::MilpLimits limits;
  double selection_tol = kSelectionTol;
  // Seed incumbents with coordinate-wise exact 0-1 local search.
  bool local_search = true;
  // Move theta_hat off the data points it passes through (see FitResult).
  bool strict_polish = true;
  std::vector<std::vector<double>> warm_starts;
  std::ostream* log = nullptr;
};

struct SolverSummary {
  milp::MilpStatus status = milp::MilpStatus::kInfeasible;
  double objective = 0.0;
  double best_bound = 0.0;
  double relative_gap = 0.0;
  double root_bound = 0.0;
  std::int64_t nodes = 0;
  double elapsed = 0.0;
};

struct FitResult {
  std::vector<double> theta_hat;
  std::vector<std::size_t> selected;
  double lambda = 0.0;
  std::optional<int> max_features;
  // Risk implied by the solver's d variables.
  double risk_milp = 0.0;
  // empirical_risk at theta_hat with the strict prediction rule.
  double risk_recomputed = 0.0;
  double penalty = 0.0;
  // The model's optimum value as reported by the solver.
  double objective = 0.0;
  bool polished = false;
  SolverSummary solver;

  double boundary_discrepancy() const;
};

class FitFailure : public std::runtime_error {
 public:
  FitFailure(const std::string& what, SolverSummary state)
      : std::runtime_error(what), state_(state) {}
  const SolverSummary& state() const { return state_; }

 private:
  SolverSummary state_;
};

FitResult fit_penalized(const Dataset& data, const ParameterBox& box, double lambda,
                        const FitOptions& options = {});

// Returns S_n^C(max_features) in `objective` / `risk_milp`.
FitResult fit_constrained(const Dataset& data, const ParameterBox& box, int max_features,
                          const FitOptions& options = {});

struct InterceptFit {
  double h = 0.0;       // minimal risk
  double t_star = 0.0;  // smallest minimizing intercept
};

// min over t in [t_lo, t_hi] of (1/n) sum 1{y_i != 1{x1_i + t >= 0}}.
InterceptFit fit_intercept_only(const Dataset& data, double t_lo = -10.0, double t_hi = 10.0);

// S_n(theta) + lambda * (number of exactly nonzero coordinates).
double penalized_objective(const Dataset& data, std::span<const double> theta, double lambda);

// Coordinate-wise exact minimization of the penalized 0-1 objective starting
// at `start`. With `max_support`, no move may exceed that many nonzeros.
std::vector<double> local_search(const Dataset& data, const ParameterBox& box, double lambda,
                                 std::vector<double> start,
                                 std::optional<int> max_support = std::nullopt);

}  // namespace l0erm
