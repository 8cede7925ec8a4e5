#include "l0erm/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace l0erm {
namespace {

double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double soft(double g, double lambda) {
  // a hair of slack so that lambda_max itself gives exact zeros
  if (std::abs(g) <= lambda * (1.0 + 1e-10)) return 0.0;
  if (g > lambda) return g - lambda;
  if (g < -lambda) return g + lambda;
  return 0.0;
}

void check_design(const Dataset& data) {
  if (data.p() < 1) throw std::invalid_argument("lasso needs the constant column in xt");
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data.xt()(static_cast<Eigen::Index>(i), 0) != 1.0) {
      throw std::invalid_argument("lasso expects xt column 0 to be the constant 1");
    }
  }
}

// Standardized problem in (a0, b1, gamma).
struct Problem {
  std::size_t n = 0;
  std::size_t q = 0;
  Eigen::VectorXd y;
  Eigen::VectorXd x1;
  Eigen::MatrixXd z;  // standardized penalized columns
  std::vector<double> mean;
  std::vector<double> sd;

  explicit Problem(const Dataset& data) {
    n = data.n();
    q = data.p() - 1;
    y.resize(static_cast<Eigen::Index>(n));
    x1.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      y[static_cast<Eigen::Index>(i)] = data.label(i);
      x1[static_cast<Eigen::Index>(i)] = data.x1(i);
    }
    z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
    mean.assign(q, 0.0);
    sd.assign(q, 0.0);
    for (std::size_t j = 0; j < q; ++j) {
      const auto col = data.xt().col(static_cast<Eigen::Index>(j + 1));
      const double m = col.mean();
      const double v = (col.array() - m).square().mean();
      mean[j] = m;
      sd[j] = std::sqrt(v);
      const auto c = static_cast<Eigen::Index>(j);
      if (sd[j] > 0.0) {
        z.col(c) = (col.array() - m) / sd[j];
      } else {
        z.col(c).setZero();
      }
    }
  }
};

struct State {
  double a0 = 0.0;
  double b1 = 0.0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd eta;
};

void refresh_eta(const Problem& pr, State& s) {
  s.eta = (pr.z * s.gamma).array() + s.a0;
  s.eta += s.b1 * pr.x1;
}

double objective(const Problem& pr, const State& s, double lambda) {
  double nll = 0.0;
  for (Eigen::Index i = 0; i < s.eta.size(); ++i) nll += log1pexp(s.eta[i]) - pr.y[i] * s.eta[i];
  return nll / static_cast<double>(pr.n) + lambda * s.gamma.cwiseAbs().sum();
}

// Unpenalized logistic fit on (1, x1) by damped Newton.
void profile_unpenalized(const Problem& pr, State& s) {
  const auto n = static_cast<Eigen::Index>(pr.n);
  Eigen::MatrixXd a(n, 2);
  a.col(0).setOnes();
  a.col(1) = pr.x1;
  s.gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pr.q));
  Eigen::Vector2d beta(s.a0, s.b1);
  auto nll = [&](const Eigen::Vector2d& b) {
    const Eigen::VectorXd e = a * b;
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) v += log1pexp(e[i]) - pr.y[i] * e[i];
    return v;
  };
  double cur = nll(beta);
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd e = a * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = sigmoid(e[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
    }
    const Eigen::Vector2d g = a.transpose() * (pr.y - mu);
    const Eigen::Matrix2d h = a.transpose() * w.asDiagonal() * a + 1e-12 * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d step = h.ldlt().solve(g);
    double t = 1.0;
    Eigen::Vector2d next = beta + step;
    double val = nll(next);
    while (val > cur + 1e-14 && t > 1e-10) {
      t *= 0.5;
      next = beta + t * step;
      val = nll(next);
    }
    if (val > cur + 1e-14) break;
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    cur = val;
    if (change < 1e-12) break;
  }
  s.a0 = beta[0];
  s.b1 = beta[1];
  refresh_eta(pr, s);
}

double lambda_max_of(const Problem& pr, const State& profiled) {
  double lm = 0.0;
  for (std::size_t j = 0; j < pr.q; ++j) {
    if (pr.sd[j] == 0.0) continue;
    double g = 0.0;
    for (std::size_t i = 0; i < pr.n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      g += pr.z(r, static_cast<Eigen::Index>(j)) * (pr.y[r] - sigmoid(profiled.eta[r]));
    }
    lm = std::max(lm, std::abs(g) / static_cast<double>(pr.n));
  }
  return lm;
}

// Proximal Newton: weighted lasso subproblem by coordinate descent, then a
// backtracking step on the exact objective.
bool solve_at(const Problem& pr, State& s, double lambda, const LassoOptions& opt) {
  const auto n = static_cast<Eigen::Index>(pr.n);
  const auto q = static_cast<Eigen::Index>(pr.q);
  const double inv_n = 1.0 / static_cast<double>(pr.n);
  double cur = objective(pr, s, lambda);
  Eigen::VectorXd w(n), r(n);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = sigmoid(s.eta[i]);
      w[i] = std::max(mu * (1.0 - mu), 1e-10);
      r[i] = (pr.y[i] - mu) / w[i];
    }
    State t = s;
    const double w_sum = w.sum() * inv_n;
    const double wx1 = (w.array() * pr.x1.array().square()).sum() * inv_n;
    Eigen::VectorXd vz(q);
    for (Eigen::Index j = 0; j < q; ++j) vz[j] = (w.array() * pr.z.col(j).array().square()).sum() * inv_n;

    std::vector<char> active(static_cast<std::size_t>(q), 0);
    bool full = true;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      double max_change = 0.0;
      double d = (w.array() * r.array()).sum() * inv_n / w_sum;
      t.a0 += d;
      r.array() -= d;
      max_change = std::max(max_change, w_sum * d * d);
      if (wx1 > 0.0) {
        d = (w.array() * pr.x1.array() * r.array()).sum() * inv_n / wx1;
        t.b1 += d;
        r -= d * pr.x1;
        max_change = std::max(max_change, wx1 * d * d);
      }
      for (Eigen::Index j = 0; j < q; ++j) {
        if (pr.sd[static_cast<std::size_t>(j)] == 0.0 || vz[j] <= 0.0) continue;
        if (!full && !active[static_cast<std::size_t>(j)]) continue;
        const double g = (w.array() * pr.z.col(j).array() * r.array()).sum() * inv_n + vz[j] * t.gamma[j];
        const double next = soft(g, lambda) / vz[j];
        d = next - t.gamma[j];
        if (d != 0.0) {
          t.gamma[j] = next;
          r -= d * pr.z.col(j);
          max_change = std::max(max_change, vz[j] * d * d);
        }
        if (next != 0.0) active[static_cast<std::size_t>(j)] = 1;
      }
      if (max_change < opt.tol * 1e-2) {
        if (full) break;
        full = true;
      } else {
        full = false;
      }
    }

    // Backtracking along the proximal Newton direction.
    State base = s;
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      State cand;
      cand.a0 = base.a0 + step * (t.a0 - base.a0);
      cand.b1 = base.b1 + step * (t.b1 - base.b1);
      cand.gamma = base.gamma + step * (t.gamma - base.gamma);
      refresh_eta(pr, cand);
      const double val = objective(pr, cand, lambda);
      if (val <= cur + 1e-15 * std::max(1.0, std::abs(cur))) {
        s = std::move(cand);
        const double change = std::max({std::abs(t.a0 - base.a0), std::abs(t.b1 - base.b1),
                                         (t.gamma - base.gamma).cwiseAbs().maxCoeff()}) * step;
        const double drop = cur - val;
        cur = val;
        accepted = true;
        if (change < 1e-9 && drop < opt.tol) return true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return true;  // no further descent possible in floating point
  }
  return false;
}

LassoFit to_original(const Problem& pr, const State& s) {
  LassoFit f;
  f.beta1 = s.b1;
  f.theta.assign(pr.q + 1, 0.0);
  double a = s.a0;
  for (std::size_t j = 0; j < pr.q; ++j) {
    if (pr.sd[j] == 0.0) continue;
    const double b = s.gamma[static_cast<Eigen::Index>(j)] / pr.sd[j];
    f.theta[j + 1] = b;
    a -= b * pr.mean[j];
  }
  f.theta[0] = a;
  return f;
}

LassoPath fit_path(const Dataset& data, const LassoOptions& opt, const std::vector<double>& grid) {
  const Problem pr(data);
  State s;
  profile_unpenalized(pr, s);
  LassoPath path;
  path.lambdas = grid;
  path.scales = pr.sd;
  for (double lambda : grid) {
    const bool ok = solve_at(pr, s, lambda, opt);
    LassoFit f = to_original(pr, s);
    f.converged = ok;
    path.fits.push_back(std::move(f));
  }
  return path;
}

std::vector<double> make_grid(const Dataset& data, const LassoOptions& opt) {
  if (!opt.lambdas.empty()) {
    for (std::size_t k = 0; k < opt.lambdas.size(); ++k) {
      if (!(opt.lambdas[k] >= 0.0) || (k > 0 && !(opt.lambdas[k] < opt.lambdas[k - 1]))) {
        throw std::invalid_argument("lasso grid must be strictly decreasing and nonnegative");
      }
    }
    return opt.lambdas;
  }
  if (opt.grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
  const double ratio = opt.lambda_min_ratio.value_or(data.p() > data.n() ? 0.01 : 1e-4);
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("lambda_min_ratio must lie in (0, 1)");
  double lmax = lasso_lambda_max(data);
  if (!(lmax > 0.0)) lmax = 1e-6;
  std::vector<double> grid(static_cast<std::size_t>(opt.grid_size));
  const double lo = std::log(ratio);
  for (int k = 0; k < opt.grid_size; ++k) {
    grid[static_cast<std::size_t>(k)] = lmax * std::exp(lo * k / (opt.grid_size - 1));
  }
  grid.front() = lmax;
  return grid;
}

}  // namespace

double lasso_lambda_max(const Dataset& data) {
  check_design(data);
  const Problem pr(data);
  State s;
  profile_unpenalized(pr, s);
  return lambda_max_of(pr, s);
}

LassoPath fit_logit_lasso_path(const Dataset& data, const LassoOptions& options) {
  check_design(data);
  return fit_path(data, options, make_grid(data, options));
}

double lasso_index(const LassoFit& fit, const Dataset& data, std::size_t row) {
  return fit.beta1 * data.x1(row) +
         data.xt().row(static_cast<Eigen::Index>(row)).dot(
             Eigen::Map<const Eigen::VectorXd>(fit.theta.data(), static_cast<Eigen::Index>(fit.theta.size())));
}

double lasso_misclassification(const LassoFit& fit, const Dataset& data) {
  if (fit.theta.size() != data.p()) throw std::invalid_argument("coefficient length mismatch");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.n(); ++i) wrong += ((lasso_index(fit, data, i) >= 0.0 ? 1 : 0) != data.label(i));
  return static_cast<double>(wrong) / static_cast<double>(data.n());
}

double lasso_objective(const Dataset& data, const LassoFit& fit, double lambda) {
  check_design(data);
  const Problem pr(data);
  double nll = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double e = lasso_index(fit, data, i);
    nll += log1pexp(e) - data.label(i) * e;
  }
  double pen = 0.0;
  for (std::size_t j = 0; j < pr.q; ++j) pen += pr.sd[j] * std::abs(fit.theta[j + 1]);
  return nll / static_cast<double>(data.n()) + lambda * pen;
}

double lasso_kkt_residual(const Dataset& data, const LassoFit& fit, double lambda) {
  check_design(data);
  const Problem pr(data);
  const auto n = static_cast<Eigen::Index>(data.n());
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    resid[i] = pr.y[i] - sigmoid(lasso_index(fit, data, static_cast<std::size_t>(i)));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double worst = std::max(std::abs(resid.sum() * inv_n), std::abs(pr.x1.dot(resid) * inv_n));
  for (std::size_t j = 0; j < pr.q; ++j) {
    if (pr.sd[j] == 0.0) continue;
    const double g = pr.z.col(static_cast<Eigen::Index>(j)).dot(resid) * inv_n;
    const double gamma = fit.theta[j + 1] * pr.sd[j];
    const double v = gamma == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                  : std::abs(g - lambda * (gamma > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

CvResult cross_validate(const Dataset& data, const CvOptions& options) {
  check_design(data);
  const std::size_t n = data.n();
  const int k = options.folds;
  if (k < 2 || static_cast<std::size_t>(k) > n) throw std::invalid_argument("folds must lie in [2, n]");

  CvResult out;
  out.lambdas = make_grid(data, options.path);
  out.path = fit_path(data, options.path, out.lambdas);

  // Fold labels by seeded shuffling; the stratified variant deals each class separately.
  std::mt19937_64 gen(options.seed);
  std::vector<int> fold(n);
  auto deal = [&](std::vector<std::size_t> rows, std::size_t offset) {
    std::shuffle(rows.begin(), rows.end(), gen);
    for (std::size_t r = 0; r < rows.size(); ++r) fold[rows[r]] = static_cast<int>((r + offset) % static_cast<std::size_t>(k));
    return rows.size();
  };
  if (options.stratified) {
    std::vector<std::size_t> zeros, ones;
    for (std::size_t i = 0; i < n; ++i) (data.label(i) ? ones : zeros).push_back(i);
    const std::size_t used = deal(zeros, 0);
    deal(ones, used);
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    deal(all, 0);
  }

  const std::size_t g = out.lambdas.size();
  std::vector<std::vector<double>> risk(g, std::vector<double>(static_cast<std::size_t>(k), 0.0));
  LassoOptions fold_opt = options.path;
  fold_opt.lambdas = out.lambdas;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
    const Dataset tr = data.subset(train);
    const Dataset te = data.subset(test);
    const auto ones = std::count(tr.labels().begin(), tr.labels().end(), 1);
    if (ones == 0 || static_cast<std::size_t>(ones) == tr.n()) {
      out.warnings.push_back(fmt::format("fold {} has a single class in its training part", f + 1));
    }
    const LassoPath fp = fit_path(tr, fold_opt, out.lambdas);
    for (std::size_t l = 0; l < g; ++l) risk[l][static_cast<std::size_t>(f)] = lasso_misclassification(fp.fits[l], te);
  }

  out.mean_risk.resize(g);
  out.se.resize(g);
  for (std::size_t l = 0; l < g; ++l) {
    const double m = std::accumulate(risk[l].begin(), risk[l].end(), 0.0) / k;
    double ss = 0.0;
    for (double v : risk[l]) ss += (v - m) * (v - m);
    out.mean_risk[l] = m;
    out.se[l] = std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k));
  }
  // Grid is decreasing, so the first minimizer is the largest lambda.
  std::size_t best = 0;
  for (std::size_t l = 1; l < g; ++l)
    if (out.mean_risk[l] < out.mean_risk[best]) best = l;
  out.opt_index = best;
  const double cut = out.mean_risk[best] + out.se[best];
  std::size_t one = best;
  for (std::size_t l = 0; l <= best; ++l) {
    if (out.mean_risk[l] <= cut) {
      one = l;
      break;
    }
  }
  out.one_se_index = one;
  out.lambda_opt = out.lambdas[best];
  out.lambda_1se = out.lambdas[one];
  return out;
}

NormalizedLasso normalize_to_classifier(const LassoFit& fit) {
  NormalizedLasso out;
  const double mag = std::abs(fit.beta1);
  out.negative_beta1 = fit.beta1 < 0.0;
  if (mag < 1e-12) {
    out.degenerate = true;
    out.classifier.theta = fit.theta;
    return out;
  }
  out.classifier.theta.resize(fit.theta.size());
  for (std::size_t j = 0; j < fit.theta.size(); ++j) out.classifier.theta[j] = fit.theta[j] / mag;
  return out;
}

}  // namespace l0erm
