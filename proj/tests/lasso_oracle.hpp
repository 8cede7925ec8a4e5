#pragma once

// Unpenalized logistic MLE by Newton's method with step halving.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "l0erm/core.hpp"

namespace oracle {

// Returns (beta1, theta) with index beta1 * x1 + xt' theta.
inline Eigen::VectorXd logistic_mle(const l0erm::Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto k = static_cast<Eigen::Index>(data.p() + 1);
  Eigen::MatrixXd a(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = data.x1(static_cast<std::size_t>(i));
    a.row(i).tail(k - 1) = data.xt().row(i);
    y[i] = data.label(static_cast<std::size_t>(i));
  }
  auto nll = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd e = a * b;
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) v += std::log1p(std::exp(-std::abs(e[i]))) + std::max(e[i], 0.0) - y[i] * e[i];
    return v;
  };
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  double cur = nll(b);
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd e = a * b;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = 1.0 / (1.0 + std::exp(-e[i]));
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd g = a.transpose() * (y - mu);
    const Eigen::MatrixXd h = a.transpose() * w.asDiagonal() * a;
    const Eigen::VectorXd step = h.ldlt().solve(g);
    double t = 1.0;
    Eigen::VectorXd next = b + step;
    while (nll(next) > cur && t > 1e-12) {
      t *= 0.5;
      next = b + t * step;
    }
    const double change = (next - b).cwiseAbs().maxCoeff();
    b = next;
    cur = nll(b);
    if (change < 1e-13) break;
  }
  return b;
}

}  // namespace oracle
