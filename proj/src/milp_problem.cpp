#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "l0erm/milp.hpp"
#include "simplex.hpp"

namespace l0erm::milp {

int MilpProblem::add_variable(double lower, double upper, double cost, bool binary,
                              std::string name) {
  objective.push_back(cost);
  var_lower.push_back(lower);
  var_upper.push_back(upper);
  is_binary.push_back(binary);
  var_names.push_back(std::move(name));
  return num_vars() - 1;
}

void MilpProblem::add_constraint(std::vector<Term> terms, Sense sense, double rhs,
                                 std::string name) {
  constraints.push_back(Constraint{std::move(terms), sense, rhs, std::move(name)});
}

void MilpProblem::validate() const {
  const auto n = objective.size();
  if (n == 0) throw std::invalid_argument("milp: model has no variables");
  if (var_lower.size() != n || var_upper.size() != n || is_binary.size() != n) {
    throw std::invalid_argument("milp: variable arrays have inconsistent lengths");
  }
  if (!var_names.empty() && var_names.size() != n) {
    throw std::invalid_argument("milp: var_names must be empty or one per variable");
  }
  if (!std::isfinite(objective_offset)) throw std::invalid_argument("milp: offset not finite");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) {
      throw std::invalid_argument(fmt::format("milp: objective coefficient {} not finite", j));
    }
    if (std::isnan(var_lower[j]) || std::isnan(var_upper[j]) || var_lower[j] > var_upper[j]) {
      throw std::invalid_argument(fmt::format("milp: invalid bounds on variable {}", j));
    }
    if (is_binary[j] && (var_lower[j] < 0.0 || var_upper[j] > 1.0)) {
      throw std::invalid_argument(fmt::format("milp: binary variable {} has bounds outside [0,1]", j));
    }
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const Constraint& c = constraints[i];
    if (!std::isfinite(c.rhs)) {
      throw std::invalid_argument(fmt::format("milp: constraint {} has non-finite rhs", i));
    }
    for (const Term& t : c.terms) {
      if (t.var < 0 || static_cast<std::size_t>(t.var) >= n) {
        throw std::invalid_argument(fmt::format("milp: constraint {} references variable {}", i, t.var));
      }
      if (!std::isfinite(t.coef)) {
        throw std::invalid_argument(fmt::format("milp: constraint {} has a non-finite coefficient", i));
      }
    }
  }
}

double MilpProblem::evaluate_objective(std::span<const double> x) const {
  double v = objective_offset;
  for (std::size_t j = 0; j < objective.size(); ++j) v += objective[j] * x[j];
  return v;
}

double MilpProblem::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < objective.size(); ++j) {
    worst = std::max({worst, var_lower[j] - x[j], x[j] - var_upper[j]});
  }
  for (const Constraint& c : constraints) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    switch (c.sense) {
      case Sense::kLessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Sense::kGreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Sense::kEqual: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

double MilpProblem::max_integrality_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < objective.size(); ++j) {
    if (is_binary[j]) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  return worst;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kFeasibleLimitHit: return "feasible_limit_hit";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

LpSolution solve_lp(const MilpProblem& problem, const SimplexOptions& options) {
  problem.validate();
  detail::BoundedSimplex simplex(problem, options);
  LpSolution out;
  out.status = simplex.solve();
  out.iterations = simplex.iterations();
  if (out.status == LpStatus::kOptimal) {
    const auto v = simplex.structural_values();
    out.values.assign(v.begin(), v.end());
    out.objective = simplex.objective() + problem.objective_offset;
  }
  return out;
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  const double diff = incumbent - bound;
  if (diff <= 0.0) return 0.0;
  return diff / std::max(std::abs(incumbent), 1e-10);
}

namespace {

std::string var_name(const MilpProblem& p, std::size_t j) {
  std::string raw = j < p.var_names.size() ? p.var_names[j] : std::string();
  if (raw.empty()) return fmt::format("x{}", j);
  // LP-format names may not contain whitespace or operator characters.
  for (char& ch : raw) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == ':' ||
        ch == '<' || ch == '>' || ch == '=' || ch == '*' || ch == '^') {
      ch = '_';
    }
  }
  return raw;
}

void append_linear(std::string& out, const MilpProblem& p, const std::vector<Term>& terms) {
  bool first = true;
  for (const Term& t : terms) {
    const double mag = std::abs(t.coef);
    const char* sign = t.coef < 0.0 ? "-" : "+";
    if (first) {
      out += t.coef < 0.0 ? "- " : "";
    } else {
      out += fmt::format(" {} ", sign);
    }
    out += fmt::format("{} {}", mag, var_name(p, static_cast<std::size_t>(t.var)));
    first = false;
  }
  if (first) out += fmt::format("0 {}", var_name(p, 0));
}

std::string bound_text(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  return fmt::format("{}", v);
}

}  // namespace

std::string to_lp_format(const MilpProblem& problem) {
  problem.validate();
  std::string out;
  out += fmt::format("\\ objective offset: {}\n", problem.objective_offset);
  out += "Minimize\n obj: ";
  std::vector<Term> obj;
  for (std::size_t j = 0; j < problem.objective.size(); ++j) {
    if (problem.objective[j] != 0.0) obj.push_back({static_cast<int>(j), problem.objective[j]});
  }
  append_linear(out, problem, obj);
  out += "\nSubject To\n";
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const Constraint& c = problem.constraints[i];
    const std::string name = c.name.empty() ? fmt::format("c{}", i) : c.name;
    out += fmt::format(" {}: ", name);
    append_linear(out, problem, c.terms);
    const char* op = c.sense == Sense::kLessEqual ? "<=" : c.sense == Sense::kGreaterEqual ? ">=" : "=";
    out += fmt::format(" {} {}\n", op, c.rhs);
  }
  out += "Bounds\n";
  for (std::size_t j = 0; j < problem.objective.size(); ++j) {
    if (problem.is_binary[j] && problem.var_lower[j] == 0.0 && problem.var_upper[j] == 1.0) continue;
    const double lo = problem.var_lower[j];
    const double hi = problem.var_upper[j];
    const std::string name = var_name(problem, j);
    if (lo == -kInf && hi == kInf) {
      out += fmt::format(" {} free\n", name);
    } else if (lo == hi) {
      out += fmt::format(" {} = {}\n", name, lo);
    } else {
      out += fmt::format(" {} <= {} <= {}\n", bound_text(lo), name, bound_text(hi));
    }
  }
  std::string bins;
  for (std::size_t j = 0; j < problem.objective.size(); ++j) {
    if (problem.is_binary[j]) bins += " " + var_name(problem, j) + "\n";
  }
  if (!bins.empty()) out += "Binaries\n" + bins;
  out += "End\n";
  return out;
}

void write_lp_file(const MilpProblem& problem, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << to_lp_format(problem);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace l0erm::milp
