#include "l0erm/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace l0erm {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

Dataset::Dataset(std::vector<int> labels, std::vector<double> x1, Eigen::MatrixXd xt)
    : labels_(std::move(labels)), x1_(std::move(x1)), xt_(std::move(xt)) {
  if (labels_.empty()) throw std::invalid_argument("dataset needs at least one row");
  if (x1_.size() != labels_.size() || static_cast<std::size_t>(xt_.rows()) != labels_.size()) {
    throw std::invalid_argument("dataset: labels, x1 and xt row counts differ");
  }
  for (int y : labels_) {
    if (y != 0 && y != 1) throw std::invalid_argument("dataset: labels must be 0 or 1");
  }
  for (double v : x1_) require_finite(v, "x1 entries");
  if (!xt_.allFinite()) throw std::invalid_argument("xt entries must be finite");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<int> y;
  std::vector<double> x1;
  Eigen::MatrixXd xt(static_cast<Eigen::Index>(rows.size()), xt_.cols());
  y.reserve(rows.size());
  x1.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (i >= n()) throw std::out_of_range("dataset subset: row index out of range");
    y.push_back(labels_[i]);
    x1.push_back(x1_[i]);
    xt.row(static_cast<Eigen::Index>(k)) = xt_.row(static_cast<Eigen::Index>(i));
  }
  return Dataset(std::move(y), std::move(x1), std::move(xt));
}

ParameterBox ParameterBox::uniform(std::size_t p, double lo, double hi) {
  ParameterBox box{std::vector<double>(p, lo), std::vector<double>(p, hi)};
  box.validate();
  return box;
}

bool ParameterBox::contains(std::span<const double> theta, double tol) const {
  if (theta.size() != lower.size()) return false;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] < lower[j] - tol || theta[j] > upper[j] + tol) return false;
  }
  return true;
}

void ParameterBox::validate() const {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("parameter box: lower/upper lengths differ");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    require_finite(lower[j], "parameter box bounds");
    require_finite(upper[j], "parameter box bounds");
    if (lower[j] > upper[j]) {
      throw std::invalid_argument("parameter box: lower exceeds upper at index " +
                                  std::to_string(j));
    }
  }
}

double score(std::span<const double> theta, double x1, std::span<const double> xrow) {
  if (theta.size() != xrow.size()) {
    throw std::invalid_argument("score: theta has " + std::to_string(theta.size()) +
                                " entries but the feature row has " +
                                std::to_string(xrow.size()));
  }
  double s = x1;
  for (std::size_t j = 0; j < theta.size(); ++j) s += xrow[j] * theta[j];
  return s;
}

double score(const Dataset& data, std::size_t row, std::span<const double> theta) {
  if (theta.size() != data.p()) {
    throw std::invalid_argument("score: theta length " + std::to_string(theta.size()) +
                                " does not match p=" + std::to_string(data.p()));
  }
  double s = data.x1(row);
  const auto r = static_cast<Eigen::Index>(row);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    s += data.xt()(r, static_cast<Eigen::Index>(j)) * theta[j];
  }
  return s;
}

int predict(std::span<const double> theta, double x1, std::span<const double> xrow) {
  return score(theta, x1, xrow) >= 0.0 ? 1 : 0;
}

std::size_t misclassified_count(const Dataset& data, std::span<const double> theta) {
  if (theta.size() != data.p()) {
    throw std::invalid_argument("empirical_risk: theta length " + std::to_string(theta.size()) +
                                " does not match p=" + std::to_string(data.p()));
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const int yhat = score(data, i, theta) >= 0.0 ? 1 : 0;
    if (yhat != data.label(i)) ++errors;
  }
  return errors;
}

double empirical_risk(const Dataset& data, std::span<const double> theta) {
  return static_cast<double>(misclassified_count(data, theta)) / static_cast<double>(data.n());
}

std::size_t l0_norm(std::span<const double> theta, double tol) {
  if (tol < 0.0) throw std::invalid_argument("l0_norm: tol must be nonnegative");
  std::size_t count = 0;
  for (double v : theta) {
    if (std::abs(v) > tol) ++count;
  }
  return count;
}

std::vector<std::size_t> selected_indices(std::span<const double> theta, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (std::abs(theta[j]) > tol) out.push_back(j);
  }
  return out;
}

}  // namespace l0erm
