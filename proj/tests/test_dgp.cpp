#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "l0erm/dgp.hpp"

using namespace l0erm;

namespace {

// Gauss-Hermite nodes and weights for weight exp(-x^2), Golub-Welsch.
void gauss_hermite(int m, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  x.resize(static_cast<std::size_t>(m));
  w.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    x[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
    const double v = es.eigenvectors()(0, k);
    w[static_cast<std::size_t>(k)] = std::sqrt(std::numbers::pi) * v * v;
  }
}

// E[Lambda((V1 + theta2 V2) / sigma(V1, V2))] by tensor Gauss-Hermite.
double mean_label(const DgpSpec& spec) {
  std::vector<double> x, w;
  gauss_hermite(80, x, w);
  const double rho = spec.covariance_rho;
  double total = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = 0; b < x.size(); ++b) {
      const double z1 = std::sqrt(2.0) * x[a];
      const double z2 = std::sqrt(2.0) * x[b];
      const double v1 = z1;
      const double v2 = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
      total += w[a] * w[b] * logistic_cdf((v1 + spec.theta2_star * v2) / spec.scale(v1, v2));
    }
  }
  return total / std::numbers::pi;
}

}  // namespace

TEST_CASE("covariance matrix") {
  CHECK(build_covariance(1)(0, 0) == 1.0);
  const auto s2 = build_covariance(2);
  CHECK(s2(0, 1) == 0.25);
  CHECK(s2(1, 0) == 0.25);
  CHECK(build_covariance(3)(0, 2) == 0.0625);
}

TEST_CASE("cholesky") {
  CHECK(cholesky(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 9;
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0, 0, 3;
  CHECK(cholesky(d).isApprox(expect));
  const auto s = build_covariance(5);
  const auto l = cholesky(s);
  CHECK((l * l.transpose() - s).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix()).isZero());
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky(bad), std::domain_error);
}

TEST_CASE("true parameter and Bayes classifier") {
  const auto a = bayes_classifier(DgpSpec::make(DgpVariant::kI, 10));
  const auto b = bayes_classifier(DgpSpec::make(DgpVariant::kII, 10));
  CHECK(a.theta[1] == -0.55);
  CHECK(b.theta[1] == -1.85);
  int nonzero = 0;
  for (std::size_t j = 1; j < a.theta.size(); ++j) nonzero += a.theta[j] != 0.0;
  CHECK(nonzero == 1);
  CHECK(a.theta[0] == 0.0);
  CHECK_THROWS_AS(DgpSpec::make(DgpVariant::kI, 1), std::invalid_argument);
}

TEST_CASE("logistic cdf keeps the sign of its argument") {
  CHECK(logistic_cdf(0.0) == 0.5);
  CHECK(logistic_cdf(-1e-300) < 0.5);
  CHECK(logistic_cdf(1e-300) >= 0.5);
  CHECK(logistic_cdf(-800.0) >= 0.0);
  CHECK(logistic_cdf(800.0) == 1.0);
}

TEST_CASE("sample columns and Bayes identity") {
  for (auto variant : {DgpVariant::kI, DgpVariant::kII}) {
    const auto spec = DgpSpec::make(variant, 6);
    const auto s = generate(spec, 2000, 11);
    for (std::size_t i = 0; i < s.dataset.n(); ++i) {
      CHECK(s.dataset.xt()(static_cast<Eigen::Index>(i), 0) == 1.0);
      CHECK(s.eta[i] > 0.0);
      CHECK(s.eta[i] < 1.0);
      CHECK((s.eta[i] >= 0.5) == (score(s.dataset, i, s.theta_star) >= 0.0));
    }
  }
}

TEST_CASE("generation is deterministic per seed and stream") {
  const auto spec = DgpSpec::make(DgpVariant::kII, 5);
  const auto a = generate(spec, 300, 7, 3);
  const auto b = generate(spec, 300, 7, 3);
  const auto c = generate(spec, 300, 7, 4);
  CHECK(a.dataset.labels() == b.dataset.labels());
  CHECK(a.dataset.x1() == b.dataset.x1());
  CHECK(a.dataset.xt() == b.dataset.xt());
  CHECK(a.eta == b.eta);
  CHECK(a.dataset.x1() != c.dataset.x1());
  CHECK(make_stream(1, 0, 1)() != make_stream(1, 0, 2)());
  CHECK(make_stream(1, 0, 1)() != make_stream(1, 1, 1)());
}

TEST_CASE("sample covariance at n = 50000") {
  const auto spec = DgpSpec::make(DgpVariant::kI, 5);
  const auto s = generate(spec, 50000, 2024);
  const auto& xt = s.dataset.xt();
  Eigen::MatrixXd v(50000, 5);
  for (Eigen::Index i = 0; i < 50000; ++i) {
    v(i, 0) = s.dataset.x1(static_cast<std::size_t>(i));
    for (Eigen::Index j = 1; j < 5; ++j) v(i, j) = xt(i, j);
  }
  const Eigen::RowVectorXd mean = v.colwise().mean();
  const Eigen::MatrixXd centred = v.rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred / 49999.0;
  CHECK((cov - build_covariance(5)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("logistic draws pass a KS check at n = 10000") {
  auto gen = make_stream(99, 0, StreamPurpose::kAux);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = sample_logistic(gen);
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = logistic_cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  CHECK(d < 0.02);
}

TEST_CASE("mean label matches numerical integration") {
  for (auto variant : {DgpVariant::kI, DgpVariant::kII}) {
    const auto spec = DgpSpec::make(variant, 4);
    const double expected = mean_label(spec);
    CHECK(expected == doctest::Approx(0.5).epsilon(1e-8));
    const auto s = generate(spec, 50000, 31337);
    double mean = 0.0;
    for (int y : s.dataset.labels()) mean += y;
    mean /= 50000.0;
    CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(expected * (1 - expected) / 50000.0));
  }
}
