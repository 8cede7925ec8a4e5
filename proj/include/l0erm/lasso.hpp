#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "l0erm/core.hpp"

namespace l0erm {

// Coefficients on the original scale. The linear index is
// beta1 * x1 + xt_row' theta, where theta[0] multiplies the constant column.
struct LassoFit {
  double beta1 = 0.0;
  std::vector<double> theta;
  bool converged = true;
};

struct LassoOptions {
  int grid_size = 100;
  // Defaults to 0.01 when p > n and 1e-4 otherwise.
  std::optional<double> lambda_min_ratio;
  int max_outer = 200;
  int max_sweeps = 10000;
  double tol = 1e-12;
  // Explicit grid, overrides grid_size and the ratio when nonempty.
  std::vector<double> lambdas;
};

struct LassoPath {
  std::vector<double> lambdas;  // strictly decreasing
  std::vector<LassoFit> fits;
  // Per penalized column (xt columns 1..p-1) standard deviation used for
  // the penalty weights; zero-variance columns are never entered.
  std::vector<double> scales;
};

// Logit-lasso path. xt column 0 must be the constant 1; x1 and the
// intercept are unpenalized, xt columns 1..p-1 are standardized and penalized.
LassoPath fit_logit_lasso_path(const Dataset& data, const LassoOptions& options = {});

// Smallest lambda with every penalized coefficient at zero.
double lasso_lambda_max(const Dataset& data);

// (1/n) sum [log(1 + exp(index)) - y index] + lambda * sum_j sd_j |theta_j|.
double lasso_objective(const Dataset& data, const LassoFit& fit, double lambda);

// Largest violation of the subgradient conditions, in standardized units.
double lasso_kkt_residual(const Dataset& data, const LassoFit& fit, double lambda);

double lasso_index(const LassoFit& fit, const Dataset& data, std::size_t row);
double lasso_misclassification(const LassoFit& fit, const Dataset& data);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 1;
  bool stratified = false;
  LassoOptions path;
};

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> mean_risk;
  std::vector<double> se;
  std::size_t opt_index = 0;
  std::size_t one_se_index = 0;
  double lambda_opt = 0.0;
  double lambda_1se = 0.0;
  // Full-sample path on the same grid.
  LassoPath path;
  std::vector<std::string> warnings;
};

CvResult cross_validate(const Dataset& data, const CvOptions& options = {});

struct NormalizedLasso {
  LinearClassifier classifier;
  bool degenerate = false;   // |beta1| < 1e-12; theta holds the raw coefficients
  bool negative_beta1 = false;
};

NormalizedLasso normalize_to_classifier(const LassoFit& fit);

}  // namespace l0erm
