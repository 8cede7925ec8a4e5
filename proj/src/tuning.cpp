#include "l0erm/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace l0erm {

double lambda_condition2(double c, std::size_t n, std::size_t p, std::vector<std::string>* warnings) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("c must be positive");
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be at least 1");
  const double m = static_cast<double>(std::max(p, n));
  const double lambda = c * std::sqrt(std::log(m) / static_cast<double>(n));
  if (lambda == 0.0 && warnings) warnings->push_back("ln(max(p, n)) = 0, so lambda = 0");
  return lambda;
}

double lambda_heuristic(std::size_t n, std::size_t p, double v, std::vector<std::string>* warnings) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("v must be nonnegative");
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be at least 1");
  const std::size_t m = std::max(p, n);
  if (m < 3) {
    throw std::invalid_argument(
        fmt::format("max(p, n) = {} is below 3, ln(ln(.)) is not positive", m));
  }
  const double lm = std::log(static_cast<double>(m));
  const double lambda = v * std::log(lm) * std::sqrt(lm / static_cast<double>(n));
  if (!(lambda > 0.0) && warnings) warnings->push_back("heuristic lambda is not positive");
  return lambda;
}

double heuristic_v(const Dataset& data) {
  const double h = fit_intercept_only(data).h;
  return h * (1.0 - h);
}

CvTuningResult tune_v_by_cv(const Dataset& data, const ParameterBox& box,
                            const CvTuningOptions& options) {
  if (options.v_grid.empty()) throw std::invalid_argument("empty v grid");
  if (options.folds < 2 || static_cast<std::size_t>(options.folds) > data.n()) {
    throw std::invalid_argument("folds must lie in [2, n]");
  }
  const std::size_t n = data.n();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(options.seed);
  std::shuffle(order.begin(), order.end(), gen);

  CvTuningResult out;
  out.cv_risk.assign(options.v_grid.size(), 0.0);
  for (int k = 0; k < options.folds; ++k) {
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < n; ++r) {
      (static_cast<int>(r % static_cast<std::size_t>(options.folds)) == k ? test : train).push_back(order[r]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    const Dataset tr = data.subset(train);
    const Dataset te = data.subset(test);
    for (std::size_t g = 0; g < options.v_grid.size(); ++g) {
      const double lambda = lambda_heuristic(tr.n(), tr.p(), options.v_grid[g]);
      const auto fit = fit_penalized(tr, box, lambda, options.fit);
      out.cv_risk[g] += empirical_risk(te, fit.theta_hat) * static_cast<double>(te.n()) / static_cast<double>(n);
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < out.cv_risk.size(); ++g) {
    const bool better = out.cv_risk[g] < out.cv_risk[best] ||
                        (out.cv_risk[g] == out.cv_risk[best] && options.v_grid[g] < options.v_grid[best]);
    if (better) best = g;
  }
  out.v = options.v_grid[best];
  out.lambda = lambda_heuristic(n, data.p(), out.v);
  return out;
}

}  // namespace l0erm
