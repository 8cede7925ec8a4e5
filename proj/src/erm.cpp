#include "l0erm/erm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace l0erm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Score margin required of d_i = 1 rows when polishing theta_hat.
constexpr double kPositiveMargin = 1e-8;

void check_inputs(const Dataset& data, const ParameterBox& box, double delta) {
  box.validate();
  if (box.size() != data.p()) {
    throw std::invalid_argument(fmt::format("parameter box has {} coordinates but p={}",
                                            box.size(), data.p()));
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be a small positive number");
  }
  for (std::size_t j = 0; j < box.size(); ++j) {
    if (box.lower[j] == box.upper[j] && box.lower[j] != 0.0) {
      throw std::invalid_argument(fmt::format(
          "coordinate {} has a zero-width box at {}; the on-off constraint cannot switch it off",
          j, box.lower[j]));
    }
  }
}

ErmModel build_common(const Dataset& data, const ParameterBox& box, double lambda, double delta) {
  check_inputs(data, box, delta);
  ErmModel model;
  model.n = data.n();
  model.p = data.p();
  model.big_m = big_m(data, box);
  auto& prob = model.problem;
  const double inv_n = 1.0 / static_cast<double>(model.n);

  for (std::size_t j = 0; j < model.p; ++j) {
    prob.add_variable(box.lower[j], box.upper[j], 0.0, false, fmt::format("theta{}", j + 1));
  }
  double positives = 0.0;
  for (std::size_t i = 0; i < model.n; ++i) {
    const int y = data.label(i);
    positives += y;
    prob.add_variable(0.0, 1.0, -(2.0 * y - 1.0) * inv_n, true, fmt::format("d{}", i + 1));
  }
  for (std::size_t j = 0; j < model.p; ++j) {
    prob.add_variable(0.0, 1.0, lambda, true, fmt::format("e{}", j + 1));
  }
  prob.objective_offset = positives * inv_n;

  const Eigen::MatrixXd& xt = data.xt();
  for (std::size_t i = 0; i < model.n; ++i) {
    std::vector<milp::Term> row;
    for (std::size_t j = 0; j < model.p; ++j) {
      const double v = xt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) row.push_back({model.theta_var(j), v});
    }
    const double m = model.big_m[i];
    auto lower_row = row;
    lower_row.push_back({model.d_var(i), -m});
    prob.add_constraint(std::move(lower_row), milp::Sense::kGreaterEqual, -m - data.x1(i),
                        fmt::format("ind_lo{}", i + 1));
    row.push_back({model.d_var(i), -(m + delta)});
    prob.add_constraint(std::move(row), milp::Sense::kLessEqual, -data.x1(i),
                        fmt::format("ind_up{}", i + 1));
  }
  for (std::size_t j = 0; j < model.p; ++j) {
    prob.add_constraint({{model.theta_var(j), 1.0}, {model.e_var(j), -box.lower[j]}},
                        milp::Sense::kGreaterEqual, 0.0, fmt::format("onoff_lo{}", j + 1));
    prob.add_constraint({{model.theta_var(j), 1.0}, {model.e_var(j), -box.upper[j]}},
                        milp::Sense::kLessEqual, 0.0, fmt::format("onoff_up{}", j + 1));
  }
  return model;
}

std::size_t count_nonzero(std::span<const double> theta) {
  return static_cast<std::size_t>(std::count_if(theta.begin(), theta.end(), [](double v) { return v != 0.0; }));
}

// Best value for coordinate j with the others held fixed, found by sweeping
// the breakpoints where individual predictions flip. Returns NaN when no
// interval inside the box qualifies.
double best_coordinate_value(const Dataset& data, const std::vector<double>& scores,
                             std::span<const double> theta, std::size_t j, double lo, double hi,
                             double lambda, bool allow_nonzero) {
  struct Break {
    double at;
    int slope;
    int y;
  };
  const std::size_t n = data.n();
  const auto col = data.xt().col(static_cast<Eigen::Index>(j));
  long errors = 0;
  std::vector<Break> breaks;
  breaks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = col[static_cast<Eigen::Index>(i)];
    const double rest = scores[i] - x * theta[j];
    const int y = data.label(i);
    if (x == 0.0) {
      errors += ((rest >= 0.0 ? 1 : 0) != y);
    } else {
      breaks.push_back({-rest / x, x > 0.0 ? 1 : -1, y});
      // As t -> -inf only negative-slope rows are predicted 1.
      errors += ((x < 0.0 ? 1 : 0) != y);
    }
  }
  std::sort(breaks.begin(), breaks.end(), [](const Break& a, const Break& b) { return a.at < b.at; });

  const double inv_n = 1.0 / static_cast<double>(n);
  double best_obj = kInf;
  double best_t = std::numeric_limits<double>::quiet_NaN();
  auto consider = [&](double left, double right, long errs) {
    const double a = std::max(left, lo);
    const double b = std::min(right, hi);
    double t;
    if (a < b) {
      t = (a < 0.0 && 0.0 < b) ? 0.0 : 0.5 * (a + b);
    } else if (a == b && left < a && a < right) {
      t = a;
    } else {
      return;
    }
    if (t != 0.0 && !allow_nonzero) return;
    const double obj = static_cast<double>(errs) * inv_n + (t != 0.0 ? lambda : 0.0);
    if (obj < best_obj) {
      best_obj = obj;
      best_t = t;
    }
  };

  double left = -kInf;
  std::size_t k = 0;
  while (k < breaks.size()) {
    const double v = breaks[k].at;
    consider(left, v, errors);
    while (k < breaks.size() && breaks[k].at == v) {
      const Break& b = breaks[k];
      // Passing v: positive slopes switch to 1, negative slopes to 0.
      const int before = b.slope > 0 ? 0 : 1;
      const int after = 1 - before;
      errors += (after != b.y) - (before != b.y);
      ++k;
    }
    left = v;
  }
  consider(left, kInf, errors);
  return best_t;
}

std::vector<double> to_model_vector(const ErmModel& model, const Dataset& data,
                                    std::span<const double> theta) {
  std::vector<double> x(static_cast<std::size_t>(model.problem.num_vars()), 0.0);
  for (std::size_t j = 0; j < model.p; ++j) {
    x[static_cast<std::size_t>(model.theta_var(j))] = theta[j];
    x[static_cast<std::size_t>(model.e_var(j))] = theta[j] != 0.0 ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < model.n; ++i) {
    x[static_cast<std::size_t>(model.d_var(i))] = score(data, i, theta) >= 0.0 ? 1.0 : 0.0;
  }
  return x;
}

// Smallest support-preserving L1 move that makes every d_i = 0 row strictly
// negative (score <= -delta) and every d_i = 1 row nonnegative.
std::optional<std::vector<double>> strict_polish(const Dataset& data, const ParameterBox& box,
                                                 std::span<const double> theta,
                                                 std::span<const int> d,
                                                 std::span<const std::size_t> support,
                                                 double delta) {
  if (support.empty()) return std::nullopt;
  milp::MilpProblem lp;
  const std::size_t s = support.size();
  for (std::size_t k = 0; k < s; ++k) {
    lp.add_variable(box.lower[support[k]], box.upper[support[k]], 0.0, false);
  }
  for (std::size_t k = 0; k < 2 * s; ++k) lp.add_variable(0.0, milp::kInf, 1.0, false);
  for (std::size_t k = 0; k < s; ++k) {
    lp.add_constraint({{static_cast<int>(k), 1.0},
                       {static_cast<int>(s + k), -1.0},
                       {static_cast<int>(2 * s + k), 1.0}},
                      milp::Sense::kEqual, theta[support[k]]);
  }
  const Eigen::MatrixXd& xt = data.xt();
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::vector<milp::Term> row;
    for (std::size_t k = 0; k < s; ++k) {
      const double v = xt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(support[k]));
      if (v != 0.0) row.push_back({static_cast<int>(k), v});
    }
    if (row.empty()) continue;
    if (d[i] == 1) {
      lp.add_constraint(std::move(row), milp::Sense::kGreaterEqual, kPositiveMargin - data.x1(i));
    } else {
      lp.add_constraint(std::move(row), milp::Sense::kLessEqual, -delta - data.x1(i));
    }
  }
  milp::LpSolution sol;
  try {
    sol = milp::solve_lp(lp);
  } catch (const milp::SolverFailure&) {
    return std::nullopt;
  }
  if (sol.status != milp::LpStatus::kOptimal) return std::nullopt;
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t k = 0; k < s; ++k) {
    out[support[k]] = std::clamp(sol.values[k], box.lower[support[k]], box.upper[support[k]]);
  }
  return out;
}

SolverSummary summarize(const milp::MilpResult& r) {
  SolverSummary s;
  s.status = r.status;
  s.objective = r.incumbent_objective;
  s.best_bound = r.best_bound;
  s.relative_gap = r.relative_gap;
  s.root_bound = r.root_bound;
  s.nodes = r.nodes_explored;
  s.elapsed = r.elapsed;
  return s;
}

std::vector<double> clip_start(const ParameterBox& box, std::vector<double> theta,
                               std::optional<int> max_support) {
  for (std::size_t j = 0; j < theta.size(); ++j) {
    theta[j] = std::clamp(theta[j], box.lower[j], box.upper[j]);
    if (std::abs(theta[j]) <= 1e-9 && box.lower[j] <= 0.0 && box.upper[j] >= 0.0) theta[j] = 0.0;
  }
  if (max_support && count_nonzero(theta) > static_cast<std::size_t>(*max_support)) {
    std::vector<std::size_t> order(theta.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(theta[a]) > std::abs(theta[b]);
    });
    for (std::size_t k = static_cast<std::size_t>(std::max(*max_support, 0)); k < order.size(); ++k) {
      if (box.lower[order[k]] <= 0.0 && box.upper[order[k]] >= 0.0) theta[order[k]] = 0.0;
    }
  }
  return theta;
}

FitResult fit_model(const Dataset& data, const ParameterBox& box, ErmModel model, double lambda,
                    std::optional<int> max_features, const FitOptions& options) {
  const std::size_t p = model.p;
  const std::size_t n = model.n;
  const double local_lambda = max_features ? 0.0 : lambda;

  milp::MilpOptions mo;
  mo.log = options.log;
  std::vector<std::vector<double>> starts;
  starts.emplace_back(p, 0.0);
  for (const auto& w : options.warm_starts) {
    if (w.size() != p) throw std::invalid_argument("warm start has the wrong length");
    starts.push_back(w);
  }
  for (auto& s : starts) {
    auto theta = clip_start(box, s, max_features);
    if (options.local_search) {
      theta = local_search(data, box, local_lambda, std::move(theta), max_features);
    }
    mo.initial_solutions.push_back(to_model_vector(model, data, theta));
  }
  if (options.local_search) {
    mo.heuristic = [&](std::span<const double> lp) -> std::optional<std::vector<double>> {
      std::vector<double> theta(lp.begin(), lp.begin() + static_cast<std::ptrdiff_t>(p));
      theta = clip_start(box, std::move(theta), max_features);
      theta = local_search(data, box, local_lambda, std::move(theta), max_features);
      return to_model_vector(model, data, theta);
    };
  }

  const milp::MilpResult res = milp::solve_milp(model.problem, options.limits, mo);
  const SolverSummary summary = summarize(res);
  if (!res.incumbent) {
    throw FitFailure(fmt::format("ERM solve ended with status {} and no incumbent after {} nodes",
                                 milp::to_string(res.status), res.nodes_explored),
                     summary);
  }
  const auto& x = *res.incumbent;

  FitResult out;
  out.lambda = max_features ? 0.0 : lambda;
  out.max_features = max_features;
  out.objective = res.incumbent_objective;
  out.solver = summary;
  out.theta_hat.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p));
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < p; ++j) {
    if (std::round(x[static_cast<std::size_t>(model.e_var(j))]) == 0.0) {
      out.theta_hat[j] = 0.0;
    } else {
      support.push_back(j);
    }
  }
  std::vector<int> d(n);
  long errors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = static_cast<int>(std::round(x[static_cast<std::size_t>(model.d_var(i))]));
    errors += (d[i] != data.label(i));
  }
  out.risk_milp = static_cast<double>(errors) / static_cast<double>(n);

  if (options.strict_polish &&
      static_cast<double>(misclassified_count(data, out.theta_hat)) != static_cast<double>(errors)) {
    if (auto polished = strict_polish(data, box, out.theta_hat, d, support, options.delta)) {
      if (misclassified_count(data, *polished) == static_cast<std::size_t>(errors)) {
        out.theta_hat = std::move(*polished);
        out.polished = true;
      }
    }
  }
  out.risk_recomputed = empirical_risk(data, out.theta_hat);
  out.selected = selected_indices(out.theta_hat, options.selection_tol);
  out.penalty = out.lambda * static_cast<double>(out.selected.size());
  return out;
}

}  // namespace

std::vector<double> big_m(const Dataset& data, const ParameterBox& box) {
  if (box.size() != data.p()) throw std::invalid_argument("big_m: box dimension mismatch");
  std::vector<double> m(data.n());
  const Eigen::MatrixXd& xt = data.xt();
  for (std::size_t i = 0; i < data.n(); ++i) {
    double hi = data.x1(i);
    double lo = data.x1(i);
    for (std::size_t j = 0; j < data.p(); ++j) {
      const double v = xt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      hi += std::max(v * box.lower[j], v * box.upper[j]);
      lo += std::min(v * box.lower[j], v * box.upper[j]);
    }
    m[i] = std::max(std::abs(hi), std::abs(lo));
  }
  return m;
}

ErmModel build_penalized_milp(const Dataset& data, const ParameterBox& box, double lambda,
                              double delta) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be a finite nonnegative number");
  }
  return build_common(data, box, lambda, delta);
}

ErmModel build_constrained_milp(const Dataset& data, const ParameterBox& box, int max_features,
                                double delta) {
  if (max_features < 0 || static_cast<std::size_t>(max_features) > data.p()) {
    throw std::invalid_argument(fmt::format("max_features must lie in [0, {}]", data.p()));
  }
  ErmModel model = build_common(data, box, 0.0, delta);
  std::vector<milp::Term> card;
  for (std::size_t j = 0; j < model.p; ++j) card.push_back({model.e_var(j), 1.0});
  model.problem.add_constraint(std::move(card), milp::Sense::kLessEqual,
                               static_cast<double>(max_features), "cardinality");
  return model;
}

double FitResult::boundary_discrepancy() const { return std::abs(risk_milp - risk_recomputed); }

FitResult fit_penalized(const Dataset& data, const ParameterBox& box, double lambda,
                        const FitOptions& options) {
  return fit_model(data, box, build_penalized_milp(data, box, lambda, options.delta), lambda,
                   std::nullopt, options);
}

FitResult fit_constrained(const Dataset& data, const ParameterBox& box, int max_features,
                          const FitOptions& options) {
  return fit_model(data, box, build_constrained_milp(data, box, max_features, options.delta), 0.0,
                   max_features, options);
}

InterceptFit fit_intercept_only(const Dataset& data, double t_lo, double t_hi) {
  if (!(t_lo <= t_hi)) throw std::invalid_argument("intercept range is empty");
  const std::size_t n = data.n();
  std::vector<std::pair<double, int>> flips;
  long errors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = data.label(i);
    const double b = -data.x1(i);
    const bool positive = data.x1(i) + t_lo >= 0.0;
    errors += ((positive ? 1 : 0) != y);
    if (!positive && b <= t_hi) flips.emplace_back(b, y);
  }
  std::sort(flips.begin(), flips.end());
  long best = errors;
  double t_star = t_lo;
  std::size_t k = 0;
  while (k < flips.size()) {
    const double v = flips[k].first;
    while (k < flips.size() && flips[k].first == v) {
      // Row switches from predicted 0 to predicted 1 at t = v.
      errors += (flips[k].second == 1) ? -1 : 1;
      ++k;
    }
    if (errors < best) {
      best = errors;
      t_star = v;
    }
  }
  return {static_cast<double>(best) / static_cast<double>(n), t_star};
}

double penalized_objective(const Dataset& data, std::span<const double> theta, double lambda) {
  return empirical_risk(data, theta) + lambda * static_cast<double>(count_nonzero(theta));
}

std::vector<double> local_search(const Dataset& data, const ParameterBox& box, double lambda,
                                 std::vector<double> start, std::optional<int> max_support) {
  if (start.size() != data.p() || box.size() != data.p()) {
    throw std::invalid_argument("local_search: dimension mismatch");
  }
  std::vector<double> theta = clip_start(box, std::move(start), max_support);
  double obj = penalized_objective(data, theta, lambda);
  std::vector<double> scores(data.n());
  const std::size_t p = data.p();

  for (int sweep = 0; sweep < 50; ++sweep) {
    for (std::size_t i = 0; i < data.n(); ++i) scores[i] = score(data, i, theta);
    bool improved = false;
    for (std::size_t j = 0; j < p; ++j) {
      const bool allow_nonzero = !max_support || theta[j] != 0.0 ||
                                 count_nonzero(theta) < static_cast<std::size_t>(*max_support);
      const double t = best_coordinate_value(data, scores, theta, j, box.lower[j], box.upper[j],
                                             lambda, allow_nonzero);
      double candidates[2] = {t, 0.0};
      for (double c : candidates) {
        if (std::isnan(c) || c == theta[j] || c < box.lower[j] || c > box.upper[j]) continue;
        const double old = theta[j];
        theta[j] = c;
        const double trial = penalized_objective(data, theta, lambda);
        if (trial < obj - 1e-12) {
          obj = trial;
          improved = true;
          const auto col = data.xt().col(static_cast<Eigen::Index>(j));
          for (std::size_t i = 0; i < data.n(); ++i) {
            scores[i] += col[static_cast<Eigen::Index>(i)] * (c - old);
          }
        } else {
          theta[j] = old;
        }
      }
    }
    if (!improved) break;
  }
  return theta;
}

}  // namespace l0erm
