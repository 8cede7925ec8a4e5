#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "erm_oracle.hpp"
#include "l0erm/erm.hpp"

using namespace l0erm;

namespace {

Dataset tiny(std::vector<int> y, std::vector<double> x1, std::vector<std::vector<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd xt(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) xt(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return Dataset(std::move(y), std::move(x1), std::move(xt));
}

}  // namespace

TEST_CASE("big M over the box") {
  auto d = tiny({1}, {1.0}, {{2.0, -3.0}});
  const auto m = big_m(d, ParameterBox::uniform(2, -10, 10));
  REQUIRE(m.size() == 1);
  CHECK(m[0] == 51.0);
}

TEST_CASE("model shape for n = 1, p = 1") {
  auto d = tiny({1}, {0.5}, {{1.0}});
  const auto model = build_penalized_milp(d, ParameterBox::uniform(1, -10, 10), 0.1);
  CHECK(model.problem.num_vars() == 3);
  CHECK(model.problem.constraints.size() == 4);
  CHECK(model.problem.is_binary[static_cast<std::size_t>(model.d_var(0))]);
  CHECK(model.problem.is_binary[static_cast<std::size_t>(model.e_var(0))]);
  CHECK_FALSE(model.problem.is_binary[0]);
  const auto constrained = build_constrained_milp(d, ParameterBox::uniform(1, -10, 10), 1);
  CHECK(constrained.problem.constraints.size() == 5);
}

TEST_CASE("model input validation") {
  auto d = tiny({1, 0}, {0.5, -1.0}, {{1.0}, {2.0}});
  CHECK_THROWS_AS(build_penalized_milp(d, ParameterBox::uniform(1, -10, 10), -0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_penalized_milp(d, ParameterBox::uniform(2, -10, 10), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_penalized_milp(d, ParameterBox::uniform(1, -10, 10), 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_penalized_milp(d, ParameterBox{{2.0}, {2.0}}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_constrained_milp(d, ParameterBox::uniform(1, -10, 10), 2), std::invalid_argument);
}

TEST_CASE("a penalty of one selects nothing") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = oracle::random_erm_instance(seed, 12, 3);
    const auto fit = fit_penalized(d, ParameterBox::uniform(3, -10, 10), 1.0);
    CHECK(l0_norm(fit.theta_hat) == 0);
    CHECK(fit.objective == doctest::Approx(fit_intercept_only(d, 0.0, 0.0).h));
  }
}

TEST_CASE("penalized fits match the exhaustive oracle") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const int p = 1 + static_cast<int>(seed % 3);
    const int n = 6 + static_cast<int>(seed % 7);
    const auto d = oracle::random_erm_instance(seed, n, p);
    const auto box = ParameterBox::uniform(static_cast<std::size_t>(p), -10, 10);
    const auto table = oracle::brute_force_erm(d, box);
    for (double lambda : {0.0, 0.05, 0.2}) {
      const auto fit = fit_penalized(d, box, lambda);
      CAPTURE(seed);
      CAPTURE(lambda);
      REQUIRE(fit.solver.status == milp::MilpStatus::kOptimal);
      CHECK(std::abs(fit.objective - table.penalized(lambda)) <= 1e-9);
      // The reported point achieves the reported objective.
      CHECK(penalized_objective(d, fit.theta_hat, lambda) <= fit.objective + 1e-9);
      CHECK(fit.boundary_discrepancy() == 0.0);
      CHECK(box.contains(fit.theta_hat, 1e-9));
      CHECK(lambda * static_cast<double>(l0_norm(fit.theta_hat)) <= 1.0);
    }
  }
}

TEST_CASE("constrained fits are monotone and tie to the penalized form") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const auto d = oracle::random_erm_instance(seed, 10, 3);
    const auto box = ParameterBox::uniform(3, -10, 10);
    const auto table = oracle::brute_force_erm(d, box);
    std::vector<double> sc;
    for (int m = 0; m <= 3; ++m) {
      const auto fit = fit_constrained(d, box, m);
      CHECK(fit.objective == doctest::Approx(table.constrained(static_cast<std::size_t>(m))).epsilon(1e-12));
      CHECK(l0_norm(fit.theta_hat, 0.0) <= static_cast<std::size_t>(m));
      sc.push_back(fit.objective);
    }
    for (std::size_t m = 1; m < sc.size(); ++m) CHECK(sc[m] <= sc[m - 1] + 1e-12);
    for (double lambda : {0.0, 0.03, 0.1, 0.25}) {
      double expected = 1e9;
      for (std::size_t m = 0; m < sc.size(); ++m) expected = std::min(expected, sc[m] + lambda * static_cast<double>(m));
      CHECK(fit_penalized(d, box, lambda).objective == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("intercept-only fit") {
  SUBCASE("all positive labels with positive x1") {
    auto d = tiny({1, 1, 1}, {0.5, 2.0, 3.0}, {{0.0}, {0.0}, {0.0}});
    const auto f = fit_intercept_only(d);
    CHECK(f.h == 0.0);
    CHECK(f.t_star == -0.5);
  }
  SUBCASE("threshold between classes") {
    auto d = tiny({0, 0, 1, 1}, {-3.0, -2.0, 1.0, 2.0}, {{0.0}, {0.0}, {0.0}, {0.0}});
    const auto f = fit_intercept_only(d);
    CHECK(f.h == 0.0);
    CHECK(f.t_star == -1.0);
  }
  SUBCASE("matches a fine grid") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 15;
      std::vector<int> y(n);
      std::vector<double> x1(n);
      for (int i = 0; i < n; ++i) {
        x1[static_cast<std::size_t>(i)] = 2.0 * nd(gen);
        y[static_cast<std::size_t>(i)] = x1[static_cast<std::size_t>(i)] + nd(gen) > 0 ? 1 : 0;
      }
      Dataset d(y, x1, Eigen::MatrixXd::Zero(n, 1));
      const auto f = fit_intercept_only(d, -3.0, 3.0);
      double grid_best = 1.0;
      for (int k = 0; k <= 60000; ++k) {
        const double t = -3.0 + 1e-4 * k;
        long e = 0;
        for (int i = 0; i < n; ++i) e += ((x1[static_cast<std::size_t>(i)] + t >= 0.0 ? 1 : 0) != y[static_cast<std::size_t>(i)]);
        grid_best = std::min(grid_best, static_cast<double>(e) / n);
      }
      CHECK(f.h <= grid_best);
      long e = 0;
      for (int i = 0; i < n; ++i) e += ((x1[static_cast<std::size_t>(i)] + f.t_star >= 0.0 ? 1 : 0) != y[static_cast<std::size_t>(i)]);
      CHECK(static_cast<double>(e) / n == f.h);
    }
  }
  auto d = tiny({1}, {0.0}, {{0.0}});
  CHECK_THROWS_AS(fit_intercept_only(d, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("local search never worsens the objective and honours the support cap") {
  for (std::uint64_t seed = 60; seed < 80; ++seed) {
    const auto d = oracle::random_erm_instance(seed, 40, 5);
    const auto box = ParameterBox::uniform(5, -10, 10);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::vector<double> start(5);
    for (auto& v : start) v = nd(gen);
    const double before = penalized_objective(d, start, 0.02);
    const auto after = local_search(d, box, 0.02, start);
    CHECK(penalized_objective(d, after, 0.02) <= before);
    const auto capped = local_search(d, box, 0.0, std::vector<double>(5, 0.0), 2);
    CHECK(l0_norm(capped, 0.0) <= 2);
  }
}

TEST_CASE("node limit still returns a usable fit") {
  const auto d = oracle::random_erm_instance(99, 60, 6);
  FitOptions opt;
  opt.limits.node_limit = 5;
  const auto fit = fit_penalized(d, ParameterBox::uniform(6, -10, 10), 0.01, opt);
  CHECK(fit.solver.best_bound <= fit.objective + 1e-12);
  CHECK(fit.risk_recomputed == doctest::Approx(fit.risk_milp));
}
