#include <cmath>

#include "doctest.h"
#include "l0erm/theory.hpp"
#include "l0erm/tuning.hpp"
#include "theory_reference.hpp"

using namespace l0erm;
using namespace reference;

TEST_CASE("heuristic lambda matches the high-precision reference") {
  CHECK(sig12(lambda_heuristic(100, 200, 1.0), kLambdaHeuristic_v1));
  CHECK(sig12(lambda_heuristic(100, 200, 0.1875), kLambdaHeuristic_v0_1875));
  CHECK(sig12(lambda_heuristic(100, 200, 0.25), kLambdaHeuristic_v0_25));
}

TEST_CASE("bound report matches the high-precision reference") {
  TheoryInputs in;  // q=1, eps=0.5, sigma=1, M=1, c=8, n=100, p=200
  const auto r = theory_report(in);
  CHECK(sig12(r.lambda, kLambda));
  CHECK(r.m0 == 1);
  CHECK(sig12(r.r_n, kRn));
  CHECK(r.s == 2.0);
  REQUIRE(r.j0.has_value());
  CHECK(*r.j0 == 1);
  CHECK(sig12(r.delta_theory, 0.25));
  CHECK(sig12(r.c_required, 6.0));
  CHECK(r.condition_c_ok);
  CHECK(sig12(r.sparsity_tail_bound, 0.005));
  CHECK(sig12(r.risk_tail_bound, 0.01));
  CHECK(sig12(r.risk_threshold, kRiskThreshold));
  CHECK(sig12(r.mean_risk_bound, kMeanRiskBound));
  CHECK(r.k_min == 1);
  CHECK(r.k_max == 2);
  REQUIRE(r.inequality.size() == 2);
  CHECK(sig12(r.inequality[0].side_lhs, kLhsK1));
  CHECK(sig12(r.inequality[0].side_rhs, kRhsK1));
  CHECK(r.inequality[0].side_condition);
  CHECK(sig12(r.inequality[1].side_lhs, kLhsK2));
  CHECK(sig12(r.inequality[1].side_rhs, kRhsK2));
  CHECK_FALSE(r.inequality[1].side_condition);
  CHECK_FALSE(r.inequality_ok);
}

TEST_CASE("per-k tail bound quantities") {
  const auto b = lemma1_bound(3, 100, 200, 1.0, 1.0);
  CHECK(sig12(b.threshold, kLemma1Threshold_k3));
  CHECK(sig12(b.tail, 1.25e-7));
  double prev = 2.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double t = lemma1_bound(k, 100, 200, 1.0, 1.0).tail;
    CHECK(t < prev);
    prev = t;
  }
  CHECK(lemma1_bound(2, 400, 50, 1.0, 1.0).threshold ==
        doctest::Approx(0.5 * lemma1_bound(2, 100, 50, 1.0, 1.0).threshold * std::sqrt(std::log(400.0) / std::log(100.0))));
  CHECK_THROWS_AS(lemma1_bound(0, 10, 10, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("s arithmetic and the 1/(q+1) relation on integer grids") {
  TheoryInputs in;
  in.q = 2;
  in.epsilon = 0.5;
  CHECK(theory_report(in).s == 3.5);
  // eps = a/b: floor(s) = q exactly when a (q + 1) < b.
  for (std::int64_t q = 1; q <= 10; ++q) {
    for (std::int64_t b = 2; b <= 60; ++b) {
      for (std::int64_t a = 1; a < b; ++a) {
        const bool small = a * (q + 1) < b;
        CHECK((floor_s_rational(q, a, b) == q) == small);
        CHECK(floor_s_rational(q, a, b) >= q);
      }
    }
  }
}

TEST_CASE("report invariants") {
  for (std::size_t q = 1; q <= 5; ++q) {
    for (double eps : {0.05, 0.3, 0.9}) {
      for (double c : {0.5, 3.0, 12.0}) {
        TheoryInputs in;
        in.q = q;
        in.epsilon = eps;
        in.c = c;
        in.n = 150;
        in.p = 40;
        const auto r = theory_report(in);
        CHECK(r.s > static_cast<double>(q));
        CHECK(r.m0 >= q);
        CHECK(r.m0 <= in.p);
        if (r.j0) {
          CHECK(*r.j0 >= 1);
          CHECK(r.mean_risk_bound >= r.risk_tail_bound);
        }
      }
    }
  }
}

TEST_CASE("undefined j0 and validation") {
  TheoryInputs in;
  in.c = 2.0;  // 2 sqrt(1)
  const auto r = theory_report(in);
  CHECK_FALSE(r.j0.has_value());
  CHECK(std::isnan(r.mean_risk_bound));
  CHECK(to_json(r).find("\"j0\": null") != std::string::npos);
  in.epsilon = 1.0;
  CHECK_THROWS_AS(theory_report(in), std::invalid_argument);
  TheoryInputs zero_lambda;
  zero_lambda.n = 1;
  zero_lambda.p = 1;
  CHECK(theory_report(zero_lambda).m0 == 1);
}

TEST_CASE("empirical check") {
  const auto r = theory_report(TheoryInputs{});
  const auto e = empirical_theory_check(r, {1, 3, 2, 1}, {0.0, 0.1, 12.0, 0.2});
  CHECK(e.freq_support_above_s == 0.25);
  CHECK(e.freq_excess_risk_above == 0.25);
}
