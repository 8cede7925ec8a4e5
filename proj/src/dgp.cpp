#include "l0erm/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace l0erm {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t rep, std::uint64_t purpose) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix64(state);
  state = h ^ rep;
  h = splitmix64(state);
  state = h ^ purpose;
  h = splitmix64(state);
  return std::mt19937_64(h);
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double NormalSampler::operator()(std::mt19937_64& gen) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform01(gen);
  } while (u1 == 0.0);
  const double u2 = uniform01(gen);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double sample_logistic(std::mt19937_64& gen) {
  double u;
  do {
    u = uniform01(gen);
  } while (u == 0.0);
  return std::log(u / (1.0 - u));
}

double logistic_cdf(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  // keep Lambda(z) < 1/2 for every z < 0 even when exp(z) rounds to 1
  return std::min(e / (1.0 + e), std::nextafter(0.5, 0.0));
}

DgpSpec DgpSpec::make(DgpVariant variant, std::size_t p) {
  DgpSpec s;
  s.variant = variant;
  s.p = p;
  s.theta2_star = variant == DgpVariant::kI ? -0.55 : -1.85;
  s.validate();
  return s;
}

void DgpSpec::validate() const {
  if (p < 2) throw std::invalid_argument("the design needs p >= 2");
  if (!(base_scale > 0.0)) throw std::invalid_argument("base scale must be positive");
  if (!(std::abs(covariance_rho) < 1.0)) throw std::invalid_argument("|rho| must be below 1");
}

double DgpSpec::scale(double v1, double v2) const {
  if (variant == DgpVariant::kI) return base_scale;
  const double s = (v1 + v2) * (v1 + v2);
  return base_scale * (1.0 + 2.0 * s + s * s);
}

DgpVariant parse_variant(const std::string& text) {
  if (text == "i" || text == "1" || text == "I") return DgpVariant::kI;
  if (text == "ii" || text == "2" || text == "II") return DgpVariant::kII;
  throw std::invalid_argument(fmt::format("unknown design '{}', expected i or ii", text));
}

std::string to_string(DgpVariant v) { return v == DgpVariant::kI ? "i" : "ii"; }

Eigen::MatrixXd build_covariance(std::size_t p, double rho) {
  if (p < 1) throw std::invalid_argument("covariance needs p >= 1");
  const auto q = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd s(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return s;
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::domain_error("cholesky: matrix is not square");
  const Eigen::Index n = a.rows();
  const double scale = a.cwiseAbs().maxCoeff();
  if (!(a - a.transpose()).isZero(1e-12 * std::max(scale, 1.0))) {
    throw std::domain_error("cholesky: matrix is not symmetric");
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw std::domain_error(fmt::format("cholesky: not positive definite at pivot {}", j));
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

LinearClassifier bayes_classifier(const DgpSpec& spec) {
  spec.validate();
  LinearClassifier c;
  c.theta.assign(spec.p, 0.0);
  c.theta[1] = spec.theta2_star;
  return c;
}

GeneratedSample generate(const DgpSpec& spec, std::size_t n, std::mt19937_64& gen) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("generate needs n >= 1");
  const auto p = static_cast<Eigen::Index>(spec.p);
  const Eigen::MatrixXd l = cholesky(build_covariance(spec.p, spec.covariance_rho));
  const std::vector<double> theta = bayes_classifier(spec).theta;

  std::vector<int> y(n);
  std::vector<double> x1(n);
  std::vector<double> eta(n);
  Eigen::MatrixXd xt(static_cast<Eigen::Index>(n), p);
  NormalSampler normal;
  Eigen::VectorXd z(p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < p; ++j) z[j] = normal(gen);
    const Eigen::VectorXd v = l * z;
    x1[i] = v[0];
    xt(r, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) xt(r, j) = v[j];
    double index = x1[i];
    for (Eigen::Index j = 0; j < p; ++j) index += xt(r, j) * theta[static_cast<std::size_t>(j)];
    const double sigma = spec.scale(v[0], v[1]);
    const double xi = sample_logistic(gen);
    y[i] = index >= sigma * xi ? 1 : 0;
    eta[i] = logistic_cdf(index / sigma);
  }
  return {Dataset(std::move(y), std::move(x1), std::move(xt)), theta, std::move(eta)};
}

GeneratedSample generate(const DgpSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t rep,
                         StreamPurpose purpose) {
  auto gen = make_stream(seed, rep, purpose);
  return generate(spec, n, gen);
}

}  // namespace l0erm
