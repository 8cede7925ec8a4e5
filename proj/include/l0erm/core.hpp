#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace l0erm {

/// Default tolerance for deciding that a coefficient is effectively nonzero.
inline constexpr double kSelectionTol = 1e-6;

// n labeled samples. `x1` is the always-included feature whose coefficient is
// normalized to +1; `xt` holds the p features subject to selection.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<int> labels, std::vector<double> x1, Eigen::MatrixXd xt);

  std::size_t n() const { return labels_.size(); }
  std::size_t p() const { return static_cast<std::size_t>(xt_.cols()); }

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& x1() const { return x1_; }
  const Eigen::MatrixXd& xt() const { return xt_; }

  int label(std::size_t i) const { return labels_[i]; }
  double x1(std::size_t i) const { return x1_[i]; }

  // Copy of the rows listed in `rows`, in that order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<int> labels_;
  std::vector<double> x1_;
  Eigen::MatrixXd xt_;
};

// Compact parameter space: the product of [lower[j], upper[j]].
struct ParameterBox {
  std::vector<double> lower;
  std::vector<double> upper;

  static ParameterBox uniform(std::size_t p, double lo, double hi);
  std::size_t size() const { return lower.size(); }
  bool contains(std::span<const double> theta, double tol = 0.0) const;
  void validate() const;
};

// b_theta(x) = 1{x1 + xrow' theta >= 0}.
struct LinearClassifier {
  std::vector<double> theta;
};

// Linear index x1 + xrow' theta.
double score(std::span<const double> theta, double x1, std::span<const double> xrow);
double score(const Dataset& data, std::size_t row, std::span<const double> theta);

// Ties at a score of exactly zero classify as 1.
int predict(std::span<const double> theta, double x1, std::span<const double> xrow);

/// Fraction of rows whose label differs from the classifier's prediction.
double empirical_risk(const Dataset& data, std::span<const double> theta);

/// Number of misclassified rows (integer numerator of empirical_risk).
std::size_t misclassified_count(const Dataset& data, std::span<const double> theta);

std::size_t l0_norm(std::span<const double> theta, double tol = kSelectionTol);

// Indices j with |theta[j]| > tol, ascending.
std::vector<std::size_t> selected_indices(std::span<const double> theta,
                                          double tol = kSelectionTol);

}  // namespace l0erm
