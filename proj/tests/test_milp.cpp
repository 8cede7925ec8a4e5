#include <cmath>
#include <sstream>

#include "doctest.h"
#include "l0erm/milp.hpp"
#include "milp_oracles.hpp"

using namespace l0erm::milp;

TEST_CASE("solve_lp small examples") {
  SUBCASE("single bounded variable") {
    MilpProblem p;
    const int x = p.add_variable(0.0, 10.0, -1.0, false, "x");
    p.add_constraint({{x, 1.0}}, Sense::kLessEqual, 3.0);
    const auto s = solve_lp(p);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.values[0] == doctest::Approx(3.0));
    CHECK(s.objective == doctest::Approx(-3.0));
  }
  SUBCASE("contradictory rows are infeasible") {
    MilpProblem p;
    const int x = p.add_variable(-kInf, kInf, 1.0, false);
    p.add_constraint({{x, 1.0}}, Sense::kGreaterEqual, 2.0);
    p.add_constraint({{x, 1.0}}, Sense::kLessEqual, 1.0);
    CHECK(solve_lp(p).status == LpStatus::kInfeasible);
  }
  SUBCASE("symmetric optimum") {
    MilpProblem p;
    const int x = p.add_variable(0.0, 1.0, -1.0, false);
    const int y = p.add_variable(0.0, 1.0, -1.0, false);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, Sense::kLessEqual, 1.0);
    const auto s = solve_lp(p);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(-1.0));
    CHECK(s.values[0] + s.values[1] == doctest::Approx(1.0));
  }
  SUBCASE("unbounded ray") {
    MilpProblem p;
    const int x = p.add_variable(0.0, kInf, -1.0, false);
    const int y = p.add_variable(-kInf, kInf, 0.0, false);
    p.add_constraint({{x, 1.0}, {y, -1.0}}, Sense::kLessEqual, 2.0);
    CHECK(solve_lp(p).status == LpStatus::kUnbounded);
  }
  SUBCASE("equality rows and free variables") {
    MilpProblem p;
    const int x = p.add_variable(-kInf, kInf, 1.0, false);
    const int y = p.add_variable(-kInf, kInf, 2.0, false);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, Sense::kEqual, 4.0);
    p.add_constraint({{x, 1.0}, {y, -1.0}}, Sense::kLessEqual, 2.0);
    const auto s = solve_lp(p);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.values[0] == doctest::Approx(3.0));
    CHECK(s.values[1] == doctest::Approx(1.0));
    CHECK(s.objective == doctest::Approx(5.0));
  }
}

TEST_CASE("solve_lp matches vertex enumeration on random small LPs") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    // Continuous-only models with 3 variables: binaries relaxed to [0,1].
    auto p = oracle::random_model(seed, 1, 2, 2 + static_cast<int>(seed % 4));
    const auto expected = oracle::enumerate_lp_vertices(p);
    const auto s = solve_lp(p);
    if (!expected) {
      CHECK(s.status == LpStatus::kInfeasible);
      continue;
    }
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(*expected).epsilon(1e-9));
    CHECK(p.max_violation(s.values) <= 1e-9);
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("solve_milp small examples") {
  SUBCASE("only integer point") {
    MilpProblem p;
    const int d = p.add_variable(0.0, 1.0, -1.0, true);
    p.add_constraint({{d, 1.0}}, Sense::kLessEqual, 0.5);
    const auto r = solve_milp(p);
    REQUIRE(r.status == MilpStatus::kOptimal);
    CHECK((*r.incumbent)[0] == 0.0);
    CHECK(r.incumbent_objective == doctest::Approx(0.0));
  }
  SUBCASE("knapsack") {
    MilpProblem p;
    const int a = p.add_variable(0.0, 1.0, -3.0, true);
    const int b = p.add_variable(0.0, 1.0, -2.0, true);
    p.add_constraint({{a, 1.0}, {b, 1.0}}, Sense::kLessEqual, 1.0);
    const auto r = solve_milp(p);
    REQUIRE(r.status == MilpStatus::kOptimal);
    CHECK(r.incumbent_objective == doctest::Approx(-3.0));
    CHECK((*r.incumbent)[0] == doctest::Approx(1.0));
    CHECK((*r.incumbent)[1] == doctest::Approx(0.0));
    CHECK(r.relative_gap == 0.0);
  }
  SUBCASE("infeasible integer model") {
    MilpProblem p;
    const int a = p.add_variable(0.0, 1.0, 1.0, true);
    p.add_constraint({{a, 1.0}}, Sense::kGreaterEqual, 0.3);
    p.add_constraint({{a, 1.0}}, Sense::kLessEqual, 0.7);
    CHECK(solve_milp(p).status == MilpStatus::kInfeasible);
  }
  SUBCASE("objective offset is carried") {
    MilpProblem p;
    p.objective_offset = 2.5;
    p.add_variable(0.0, 1.0, 1.0, true);
    const auto r = solve_milp(p);
    CHECK(r.incumbent_objective == doctest::Approx(2.5));
  }
}

TEST_CASE("solve_milp equals exhaustive enumeration on random 8-binary models") {
  int feasible = 0;
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const auto p = oracle::random_model(seed, 8, 3, 6);
    const auto expected = oracle::enumerate_milp(p);
    const auto r = solve_milp(p);
    if (!expected) {
      CHECK(r.status == MilpStatus::kInfeasible);
      continue;
    }
    ++feasible;
    REQUIRE(r.status == MilpStatus::kOptimal);
    CHECK(r.incumbent_objective == doctest::Approx(*expected).epsilon(1e-9));
    // Bound validity and incumbent feasibility.
    CHECK(r.best_bound <= *expected + 1e-9);
    CHECK(r.root_bound <= *expected + 1e-9);
    CHECK(p.max_violation(*r.incumbent) <= 1e-6);
    CHECK(p.max_integrality_violation(*r.incumbent) <= 1e-6);
    CHECK(r.relative_gap <= 1e-12);
    const auto lp = solve_lp(p);
    REQUIRE(lp.status == LpStatus::kOptimal);
    CHECK(lp.objective <= r.incumbent_objective + 1e-9);
  }
  CHECK(feasible > 30);
}

TEST_CASE("limits return a valid bound and the best incumbent") {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto p = oracle::random_model(seed, 12, 2, 8);
    const auto expected = oracle::enumerate_milp(p);
    if (!expected) continue;
    MilpLimits limits;
    limits.node_limit = 3;
    const auto r = solve_milp(p, limits);
    CHECK(r.nodes_explored <= 3);
    if (r.status == MilpStatus::kOptimal) {
      CHECK(r.incumbent_objective == doctest::Approx(*expected).epsilon(1e-9));
      continue;
    }
    REQUIRE(r.status == MilpStatus::kFeasibleLimitHit);
    CHECK(r.best_bound <= *expected + 1e-9);
    if (r.incumbent) {
      CHECK(r.incumbent_objective >= *expected - 1e-9);
      CHECK(p.max_violation(*r.incumbent) <= 1e-6);
    }
  }
}

TEST_CASE("solver is deterministic") {
  const auto p = oracle::random_model(42, 14, 3, 9);
  const auto a = solve_milp(p);
  const auto b = solve_milp(p);
  CHECK(a.nodes_explored == b.nodes_explored);
  CHECK(a.incumbent_objective == b.incumbent_objective);
  REQUIRE(a.incumbent.has_value() == b.incumbent.has_value());
  if (a.incumbent) CHECK(*a.incumbent == *b.incumbent);
}

TEST_CASE("initial solutions and heuristic candidates are feasibility checked") {
  MilpProblem p;
  const int a = p.add_variable(0.0, 1.0, -3.0, true);
  const int b = p.add_variable(0.0, 1.0, -2.0, true);
  p.add_constraint({{a, 1.0}, {b, 1.0}}, Sense::kLessEqual, 1.0);
  MilpOptions opt;
  opt.initial_solutions = {{1.0, 1.0}, {0.0, 1.0}};
  int calls = 0;
  opt.heuristic = [&](std::span<const double>) -> std::optional<std::vector<double>> {
    ++calls;
    return std::vector<double>{0.5, 0.0};
  };
  const auto r = solve_milp(p, {}, opt);
  CHECK(r.incumbent_objective == doctest::Approx(-3.0));
}

TEST_CASE("gap tolerance stops early with consistent status") {
  const auto p = oracle::random_model(77, 12, 3, 8);
  MilpLimits limits;
  limits.gap_tol = 0.5;
  const auto r = solve_milp(p, limits);
  if (r.status == MilpStatus::kOptimal) CHECK(r.relative_gap <= 0.5 + 1e-12);
}

TEST_CASE("validation errors") {
  MilpProblem empty;
  CHECK_THROWS_AS(solve_lp(empty), std::invalid_argument);
  MilpProblem p;
  p.add_variable(0.0, 2.0, 1.0, true);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  MilpProblem q;
  q.add_variable(0.0, 1.0, 1.0, false);
  q.add_constraint({{3, 1.0}}, Sense::kLessEqual, 1.0);
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  MilpProblem ok;
  ok.add_variable(0.0, 1.0, 1.0, true);
  MilpLimits bad;
  bad.time_limit = 0.0;
  CHECK_THROWS_AS(solve_milp(ok, bad), std::invalid_argument);
}

TEST_CASE("LP-format export") {
  MilpProblem p;
  const int t = p.add_variable(-10.0, 10.0, 0.0, false, "theta1");
  const int d = p.add_variable(0.0, 1.0, -0.5, true, "d1");
  p.objective_offset = 0.5;
  p.add_constraint({{t, 2.0}, {d, -51.0}}, Sense::kGreaterEqual, -52.0, "lo1");
  p.add_constraint({{t, 2.0}, {d, -3.5}}, Sense::kLessEqual, -1.0);
  const std::string text = to_lp_format(p);
  CHECK(text.find("Minimize\n obj: - 0.5 d1") != std::string::npos);
  CHECK(text.find(" lo1: 2 theta1 - 51 d1 >= -52") != std::string::npos);
  CHECK(text.find(" c1: 2 theta1 - 3.5 d1 <= -1") != std::string::npos);
  CHECK(text.find(" -10 <= theta1 <= 10") != std::string::npos);
  CHECK(text.find("Binaries\n d1\n") != std::string::npos);
  CHECK(text.find("objective offset: 0.5") != std::string::npos);
  CHECK(text.substr(text.size() - 4) == "End\n");
}
