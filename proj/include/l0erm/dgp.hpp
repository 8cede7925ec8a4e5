#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "l0erm/core.hpp"

namespace l0erm {

// Independent mt19937_64 stream for (seed, rep, purpose), seeded through splitmix64.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t rep, std::uint64_t purpose);

// Purposes used by the experiment harness.
enum class StreamPurpose : std::uint64_t { kTrain = 1, kValidation = 2, kFolds = 3, kAux = 4 };

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t rep, StreamPurpose purpose) {
  return make_stream(seed, rep, static_cast<std::uint64_t>(purpose));
}

// 53-bit uniform on [0, 1).
double uniform01(std::mt19937_64& gen);

// Box-Muller normals; keeps the second variate of each pair.
class NormalSampler {
 public:
  double operator()(std::mt19937_64& gen);

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Standard logistic draw, ln(u / (1 - u)) with u in (0, 1).
double sample_logistic(std::mt19937_64& gen);
double logistic_cdf(double z);

enum class DgpVariant { kI, kII };

struct DgpSpec {
  DgpVariant variant = DgpVariant::kI;
  std::size_t p = 10;
  double theta2_star = -0.55;
  double base_scale = 0.2;
  double covariance_rho = 0.25;

  static DgpSpec make(DgpVariant variant, std::size_t p);
  void validate() const;
  // sigma(X) given V1 and V2.
  double scale(double v1, double v2) const;
};

DgpVariant parse_variant(const std::string& text);
std::string to_string(DgpVariant v);

struct GeneratedSample {
  Dataset dataset;
  std::vector<double> theta_star;
  std::vector<double> eta;
};

// Sigma_ij = rho^|i - j|.
Eigen::MatrixXd build_covariance(std::size_t p, double rho = 0.25);

// Lower-triangular L with L L' = a. Throws std::domain_error when a is not
// symmetric positive definite.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& a);

GeneratedSample generate(const DgpSpec& spec, std::size_t n, std::mt19937_64& gen);
GeneratedSample generate(const DgpSpec& spec, std::size_t n, std::uint64_t seed,
                         std::uint64_t rep = 0, StreamPurpose purpose = StreamPurpose::kTrain);

LinearClassifier bayes_classifier(const DgpSpec& spec);

}  // namespace l0erm
