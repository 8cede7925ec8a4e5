#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "l0erm/core.hpp"
#include "l0erm/erm.hpp"

namespace l0erm {

// lambda = c * sqrt(ln(max(p, n)) / n). A zero result (p = n = 1) is
// reported through `warnings` when given.
double lambda_condition2(double c, std::size_t n, std::size_t p,
                         std::vector<std::string>* warnings = nullptr);

// lambda = v * ln(ln(max(p, n))) * sqrt(ln(max(p, n)) / n); needs max(p, n) >= 3.
double lambda_heuristic(std::size_t n, std::size_t p, double v,
                        std::vector<std::string>* warnings = nullptr);

// v = h (1 - h) with h the intercept-only risk.
double heuristic_v(const Dataset& data);

struct CvTuningOptions {
  std::vector<double> v_grid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
  int folds = 5;
  std::uint64_t seed = 1;
  FitOptions fit;
};

struct CvTuningResult {
  double v = 0.0;
  double lambda = 0.0;
  std::vector<double> cv_risk;  // one per grid value
};

// Grid search for v by K-fold held-out 0-1 risk. Ties go to the smaller v.
CvTuningResult tune_v_by_cv(const Dataset& data, const ParameterBox& box,
                            const CvTuningOptions& options = {});

}  // namespace l0erm
