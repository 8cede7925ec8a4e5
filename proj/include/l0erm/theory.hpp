#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace l0erm {

struct TheoryInputs {
  std::size_t q = 1;         // true sparsity
  double epsilon = 0.5;      // in (0, 1)
  double sigma = 1.0;
  double m_sigma = 1.0;      // the universal constant, supplied by the user
  double c = 8.0;
  std::size_t n = 100;
  std::size_t p = 200;

  void validate() const;
};

struct Lemma1Bound {
  std::size_t k = 0;
  double threshold = 0.0;  // sqrt(M k ln(p v n) / n)
  double tail = 0.0;       // exp(-sigma k ln(p v n))
  double side_lhs = 0.0;   // 4 (k+1) ln(M k ln(p v n))
  double side_rhs = 0.0;   // k ln(p v n) + 6 (k+1) ln 2
  bool side_condition = false;
};

Lemma1Bound lemma1_bound(std::size_t k, std::size_t n, std::size_t p, double m_sigma, double sigma);

struct TheoryReport {
  TheoryInputs inputs;
  double lambda = 0.0;
  std::size_t m0 = 0;
  double r_n = 0.0;
  double s = 0.0;
  std::optional<std::int64_t> j0;  // empty when c = 2 sqrt(M)
  double delta_theory = 0.0;       // 2 sqrt(M) / c
  double c_required = 0.0;         // 2 sqrt(M) (1 + eps) / eps
  bool condition_c_ok = false;
  std::size_t k_min = 0;
  std::size_t k_max = 0;
  std::vector<Lemma1Bound> inequality;  // one per k in [k_min, k_max]
  bool inequality_ok = false;
  // The bounds below are NaN when j0 is undefined.
  double sparsity_tail_bound = 0.0;
  double risk_tail_bound = 0.0;
  double risk_threshold = 0.0;
  double mean_risk_bound = 0.0;
  std::vector<std::string> notes;
};

TheoryReport theory_report(const TheoryInputs& inputs);

std::string to_json(const TheoryReport& report, int indent = 2);
std::string to_text(const TheoryReport& report);

// floor((1 + a/b) q + a/b) in exact integer arithmetic, for epsilon = a/b.
std::int64_t floor_s_rational(std::int64_t q, std::int64_t a, std::int64_t b);

// Observed frequencies next to the bounds, from Monte Carlo fits.
struct EmpiricalTheoryCheck {
  std::size_t reps = 0;
  double freq_support_above_s = 0.0;
  double freq_excess_risk_above = 0.0;  // U_n > 3 lambda s, U_n approximated by out - Bayes out risk
  double mean_excess_risk = 0.0;
};

EmpiricalTheoryCheck empirical_theory_check(const TheoryReport& report,
                                            const std::vector<std::size_t>& support_sizes,
                                            const std::vector<double>& excess_risks);

}  // namespace l0erm
