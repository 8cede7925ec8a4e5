#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace l0erm::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

// Minimization model over continuous and binary variables.
struct MilpProblem {
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
  std::vector<bool> is_binary;
  std::vector<std::string> var_names;
  std::vector<Constraint> constraints;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  int add_variable(double lower, double upper, double cost, bool binary, std::string name = {});
  void add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  // Throws std::invalid_argument when the model is malformed.
  void validate() const;

  double evaluate_objective(std::span<const double> x) const;
  // Largest bound or row violation of `x` (integrality not included).
  double max_violation(std::span<const double> x) const;
  double max_integrality_violation(std::span<const double> x) const;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  // Degenerate iterations tolerated before switching to Bland's rule.
  int stall_threshold = 50;
  int refactor_interval = 100;
};

// Continuous relaxation of `problem` (integrality dropped).
LpSolution solve_lp(const MilpProblem& problem, const SimplexOptions& options = {});

const char* to_string(LpStatus status);

enum class MilpStatus { kOptimal, kFeasibleLimitHit, kInfeasible, kUnbounded };

const char* to_string(MilpStatus status);

struct MilpLimits {
  double time_limit = kInf;  // seconds
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  double gap_tol = 0.0;
};

// Returns a full-length candidate assignment, or nothing. Candidates are
// checked for feasibility before they may become the incumbent.
using PrimalHeuristic =
    std::function<std::optional<std::vector<double>>(std::span<const double> lp_values)>;

struct MilpOptions {
  SimplexOptions simplex;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-6;
  double absolute_gap = 1e-9;
  // Feasible starting points offered before the root is solved.
  std::vector<std::vector<double>> initial_solutions;
  PrimalHeuristic heuristic;
  // The callback runs at the root and every `heuristic_frequency` nodes.
  int heuristic_frequency = 1;
  // Fix-and-resolve rounding runs at the root and every this many nodes.
  int rounding_frequency = 20;
  std::ostream* log = nullptr;
};

struct MilpResult {
  MilpStatus status = MilpStatus::kInfeasible;
  std::optional<std::vector<double>> incumbent;
  double incumbent_objective = kInf;
  double best_bound = -kInf;
  double relative_gap = kInf;
  double root_bound = -kInf;
  std::int64_t nodes_explored = 0;
  std::int64_t lp_iterations = 0;
  double elapsed = 0.0;  // seconds
};

MilpResult solve_milp(const MilpProblem& problem, const MilpLimits& limits = {},
                      const MilpOptions& options = {});

// (incumbent - bound) / max(|incumbent|, 1e-10); zero when they agree.
double relative_gap(double incumbent, double bound);

// CPLEX LP-format text (Minimize / Subject To / Bounds / Binaries / End).
std::string to_lp_format(const MilpProblem& problem);
void write_lp_file(const MilpProblem& problem, const std::string& path);

}  // namespace l0erm::milp
