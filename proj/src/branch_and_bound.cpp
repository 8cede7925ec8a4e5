#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "l0erm/milp.hpp"
#include "simplex.hpp"

namespace l0erm::milp {
namespace {

using Clock = std::chrono::steady_clock;
using detail::Basis;
using detail::BoundedSimplex;

// Frontier size beyond which node selection falls back to depth-first to
// bound memory.
constexpr std::size_t kFrontierCap = 200000;

struct Node {
  double bound = -kInf;
  int depth = 0;
  std::int64_t id = 0;
  std::int64_t parent = -1;
  std::vector<std::int8_t> fix;  // per binary: -1 free, 0 or 1 fixed
  std::shared_ptr<const Basis> basis;
};

// Heap comparators return true when `a` should be processed after `b`.
struct BestBoundOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

struct DepthFirstOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id < b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpProblem& problem, const MilpLimits& limits, const MilpOptions& options)
      : problem_(problem),
        limits_(limits),
        opt_(options),
        lp_(problem, options.simplex),
        heuristic_lp_(problem, options.simplex) {
    for (int j = 0; j < problem.num_vars(); ++j) {
      if (problem.is_binary[static_cast<std::size_t>(j)]) binaries_.push_back(j);
    }
  }

  MilpResult run();

 private:
  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }
  double cutoff() const {
    if (!incumbent_) return kInf;
    return incumbent_obj_ - std::max(opt_.absolute_gap, limits_.gap_tol * std::abs(incumbent_obj_));
  }
  bool offer(std::vector<double> x);
  void fix_and_resolve(std::span<const double> values);
  void apply_fixings(BoundedSimplex& lp, const std::vector<std::int8_t>& fix, bool all_fixed,
                     std::span<const double> rounded);
  LpStatus solve_node_lp(const Node& node);
  void push(Node node);
  Node pop();
  double frontier_bound() const;

  const MilpProblem& problem_;
  MilpLimits limits_;
  MilpOptions opt_;
  BoundedSimplex lp_;
  BoundedSimplex heuristic_lp_;
  std::vector<int> binaries_;
  Clock::time_point start_ = Clock::now();

  std::optional<std::vector<double>> incumbent_;
  double incumbent_obj_ = kInf;
  std::vector<Node> frontier_;
  bool best_first_ = false;
  double pruned_bound_ = kInf;
  std::int64_t next_id_ = 0;
  std::int64_t nodes_ = 0;
  std::int64_t last_solved_ = -1;
};

bool BranchAndBound::offer(std::vector<double> x) {
  if (x.size() != static_cast<std::size_t>(problem_.num_vars())) return false;
  for (int j : binaries_) {
    const double r = std::round(x[static_cast<std::size_t>(j)]);
    if (std::abs(x[static_cast<std::size_t>(j)] - r) <= opt_.integrality_tol) x[static_cast<std::size_t>(j)] = r;
  }
  if (problem_.max_integrality_violation(x) > opt_.integrality_tol) return false;
  if (problem_.max_violation(x) > opt_.feasibility_tol) return false;
  const double obj = problem_.evaluate_objective(x);
  if (obj >= incumbent_obj_ - 1e-12) return false;
  incumbent_obj_ = obj;
  incumbent_ = std::move(x);
  if (opt_.log) {
    *opt_.log << fmt::format("  incumbent {:.9g} after {} nodes, {:.2f}s\n", obj, nodes_, elapsed());
  }
  return true;
}

void BranchAndBound::apply_fixings(BoundedSimplex& lp, const std::vector<std::int8_t>& fix,
                                   bool all_fixed, std::span<const double> rounded) {
  for (std::size_t k = 0; k < binaries_.size(); ++k) {
    const int j = binaries_[k];
    double v = -1.0;
    if (all_fixed) {
      v = rounded[static_cast<std::size_t>(j)];
    } else if (fix[k] >= 0) {
      v = fix[k];
    }
    if (v >= 0.0) {
      lp.set_bounds(j, v, v);
    } else {
      lp.set_bounds(j, problem_.var_lower[static_cast<std::size_t>(j)],
                    problem_.var_upper[static_cast<std::size_t>(j)]);
    }
  }
}

// Rounds every binary, fixes it, and re-solves for the continuous part.
void BranchAndBound::fix_and_resolve(std::span<const double> values) {
  std::vector<double> rounded(values.begin(), values.end());
  for (int j : binaries_) rounded[static_cast<std::size_t>(j)] = std::round(rounded[static_cast<std::size_t>(j)]);
  apply_fixings(heuristic_lp_, {}, true, rounded);
  LpStatus st;
  try {
    st = heuristic_lp_.solve();
  } catch (const SolverFailure&) {
    heuristic_lp_.reset_to_slack_basis();
    return;
  }
  if (st != LpStatus::kOptimal) return;
  const auto v = heuristic_lp_.structural_values();
  std::vector<double> x(v.begin(), v.end());
  for (int j : binaries_) x[static_cast<std::size_t>(j)] = rounded[static_cast<std::size_t>(j)];
  offer(std::move(x));
}

LpStatus BranchAndBound::solve_node_lp(const Node& node) {
  if (node.parent != last_solved_) {
    if (node.basis) {
      lp_.set_basis(*node.basis);
    } else {
      lp_.reset_to_slack_basis();
    }
  }
  apply_fixings(lp_, node.fix, false, {});
  try {
    return lp_.solve();
  } catch (const SolverFailure&) {
    lp_.reset_to_slack_basis();
    return lp_.solve();
  }
}

void BranchAndBound::push(Node node) {
  frontier_.push_back(std::move(node));
  if (best_first_) {
    std::push_heap(frontier_.begin(), frontier_.end(), BestBoundOrder{});
  } else {
    std::push_heap(frontier_.begin(), frontier_.end(), DepthFirstOrder{});
  }
}

Node BranchAndBound::pop() {
  const bool want_best = incumbent_.has_value() && frontier_.size() < kFrontierCap;
  if (want_best != best_first_) {
    best_first_ = want_best;
    if (best_first_) {
      std::make_heap(frontier_.begin(), frontier_.end(), BestBoundOrder{});
    } else {
      std::make_heap(frontier_.begin(), frontier_.end(), DepthFirstOrder{});
    }
  }
  if (best_first_) {
    std::pop_heap(frontier_.begin(), frontier_.end(), BestBoundOrder{});
  } else {
    std::pop_heap(frontier_.begin(), frontier_.end(), DepthFirstOrder{});
  }
  Node n = std::move(frontier_.back());
  frontier_.pop_back();
  return n;
}

double BranchAndBound::frontier_bound() const {
  double b = kInf;
  for (const Node& n : frontier_) b = std::min(b, n.bound);
  return b;
}

MilpResult BranchAndBound::run() {
  MilpResult result;
  for (const auto& x : opt_.initial_solutions) offer(x);

  std::optional<Node> dive;
  dive.emplace();
  dive->fix.assign(binaries_.size(), -1);
  dive->id = next_id_++;

  bool limit_hit = false;
  while (true) {
    if (!dive && frontier_.empty()) break;
    if (nodes_ >= limits_.node_limit || elapsed() >= limits_.time_limit) {
      limit_hit = true;
      break;
    }
    Node node = dive ? std::move(*dive) : pop();
    dive.reset();
    if (node.bound >= cutoff()) {
      if (node.bound < incumbent_obj_) pruned_bound_ = std::min(pruned_bound_, node.bound);
      continue;
    }

    const LpStatus st = solve_node_lp(node);
    last_solved_ = node.id;
    ++nodes_;
    const bool is_root = node.parent < 0;
    if (st == LpStatus::kUnbounded) {
      if (is_root) {
        result.status = MilpStatus::kUnbounded;
        result.nodes_explored = nodes_;
        result.lp_iterations = lp_.iterations();
        result.elapsed = elapsed();
        return result;
      }
      throw SolverFailure("unbounded node relaxation below a bounded root");
    }
    if (st == LpStatus::kInfeasible) continue;

    const double obj = lp_.objective() + problem_.objective_offset;
    if (is_root) result.root_bound = obj;
    const auto sv = lp_.structural_values();
    const std::vector<double> values(sv.begin(), sv.end());
    if (obj >= cutoff()) {
      if (obj < incumbent_obj_) pruned_bound_ = std::min(pruned_bound_, obj);
      continue;
    }

    int branch = -1;
    std::size_t branch_k = 0;
    double most = opt_.integrality_tol;
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      const double v = values[static_cast<std::size_t>(binaries_[k])];
      const double frac = std::abs(v - std::round(v));
      if (frac > most) {
        most = frac;
        branch = binaries_[k];
        branch_k = k;
      }
    }

    if (branch < 0) {
      const double before = incumbent_obj_;
      fix_and_resolve(values);
      if (incumbent_obj_ == before) offer(values);
      continue;
    }

    {
      std::vector<double> rounded = values;
      for (int j : binaries_) rounded[static_cast<std::size_t>(j)] = std::round(rounded[static_cast<std::size_t>(j)]);
      offer(std::move(rounded));
    }
    if (is_root || (opt_.rounding_frequency > 0 && nodes_ % opt_.rounding_frequency == 0)) {
      fix_and_resolve(values);
    }
    if (opt_.heuristic &&
        (is_root || (opt_.heuristic_frequency > 0 && nodes_ % opt_.heuristic_frequency == 0))) {
      if (auto cand = opt_.heuristic(values)) offer(std::move(*cand));
    }
    if (obj >= cutoff()) {
      if (obj < incumbent_obj_) pruned_bound_ = std::min(pruned_bound_, obj);
      continue;
    }

    auto basis = std::make_shared<const Basis>(lp_.basis());
    Node down;
    down.bound = obj;
    down.depth = node.depth + 1;
    down.parent = node.id;
    down.fix = node.fix;
    down.basis = basis;
    Node up = down;
    down.fix[branch_k] = 0;
    up.fix[branch_k] = 1;
    down.id = next_id_++;
    up.id = next_id_++;

    const bool prefer_up = values[static_cast<std::size_t>(branch)] >= 0.5;
    if (!incumbent_) {
      if (prefer_up) {
        push(std::move(down));
        dive = std::move(up);
      } else {
        push(std::move(up));
        dive = std::move(down);
      }
    } else {
      push(std::move(down));
      push(std::move(up));
    }

    if (opt_.log && nodes_ % 1000 == 0) {
      *opt_.log << fmt::format("  nodes {} open {} incumbent {:.9g} bound {:.9g} {:.1f}s\n", nodes_,
                               frontier_.size(), incumbent_obj_, frontier_bound(), elapsed());
    }
  }

  result.nodes_explored = nodes_;
  result.lp_iterations = lp_.iterations() + heuristic_lp_.iterations();
  result.elapsed = elapsed();
  double open_bound = std::min(frontier_bound(), pruned_bound_);
  if (dive) open_bound = std::min(open_bound, dive->bound);
  if (incumbent_) {
    result.incumbent = incumbent_;
    result.incumbent_objective = incumbent_obj_;
    result.best_bound = std::min(open_bound, incumbent_obj_);
    result.relative_gap = relative_gap(incumbent_obj_, result.best_bound);
    result.status = limit_hit ? MilpStatus::kFeasibleLimitHit : MilpStatus::kOptimal;
  } else {
    result.best_bound = limit_hit ? open_bound : kInf;
    result.status = limit_hit ? MilpStatus::kFeasibleLimitHit : MilpStatus::kInfeasible;
  }
  return result;
}

}  // namespace

MilpResult solve_milp(const MilpProblem& problem, const MilpLimits& limits,
                      const MilpOptions& options) {
  problem.validate();
  if (!(limits.time_limit > 0.0) || limits.node_limit <= 0 || limits.gap_tol < 0.0) {
    throw std::invalid_argument("milp: limits must be positive (gap_tol nonnegative)");
  }
  BranchAndBound bb(problem, limits, options);
  return bb.run();
}

}  // namespace l0erm::milp
