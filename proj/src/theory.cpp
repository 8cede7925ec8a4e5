#include "l0erm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "l0erm/tuning.hpp"

namespace l0erm {

void TheoryInputs::validate() const {
  if (q < 1) throw std::invalid_argument("q must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(m_sigma > 0.0)) throw std::invalid_argument("M_sigma must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be at least 1");
  if (q > p) throw std::invalid_argument("q cannot exceed p");
}

Lemma1Bound lemma1_bound(std::size_t k, std::size_t n, std::size_t p, double m_sigma, double sigma) {
  if (k < 1 || k > p) throw std::invalid_argument("k must lie in [1, p]");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const double l = std::log(static_cast<double>(std::max(p, n)));
  const double kd = static_cast<double>(k);
  Lemma1Bound b;
  b.k = k;
  b.threshold = std::sqrt(m_sigma * kd * l / static_cast<double>(n));
  b.tail = std::exp(-sigma * kd * l);
  b.side_lhs = 4.0 * (kd + 1.0) * std::log(m_sigma * kd * l);
  b.side_rhs = kd * l + 6.0 * (kd + 1.0) * std::log(2.0);
  b.side_condition = b.side_lhs <= b.side_rhs;
  return b;
}

TheoryReport theory_report(const TheoryInputs& in) {
  in.validate();
  TheoryReport r;
  r.inputs = in;
  r.lambda = lambda_condition2(in.c, in.n, in.p);
  const double l = std::log(static_cast<double>(std::max(in.p, in.n)));
  if (r.lambda > 0.0) {
    const double inv = std::floor(1.0 / r.lambda);
    const std::size_t cap = inv >= static_cast<double>(in.p) ? in.p : static_cast<std::size_t>(inv);
    r.m0 = std::max(in.q, cap);
  } else {
    r.m0 = in.p;
    r.notes.push_back("lambda is zero, m0 taken as p");
  }
  const double qd = static_cast<double>(in.q);
  r.r_n = qd * l;
  r.s = (1.0 + in.epsilon) * qd + in.epsilon;
  const double two_root_m = 2.0 * std::sqrt(in.m_sigma);
  r.delta_theory = two_root_m / in.c;
  r.c_required = two_root_m * (1.0 + in.epsilon) / in.epsilon;
  r.condition_c_ok = in.c >= r.c_required;

  const double denom = std::abs(std::log(two_root_m) - std::log(in.c));
  if (denom > 0.0) {
    r.j0 = static_cast<std::int64_t>(
        std::ceil((std::log(static_cast<double>(r.m0)) - std::log(in.epsilon)) / denom));
  } else {
    r.notes.push_back("c equals 2 sqrt(M_sigma), j0 is undefined");
  }

  const auto floor_s = static_cast<std::size_t>(std::floor(r.s));
  std::size_t upper = std::max(r.m0, floor_s);
  if (r.j0) {
    const auto extra = static_cast<std::size_t>(*r.j0 - 1) * in.q +
                       static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(r.m0))));
    upper = std::max(upper, extra);
  }
  r.k_min = in.q;
  r.k_max = std::min(upper, in.p);
  r.inequality_ok = true;
  for (std::size_t k = r.k_min; k <= r.k_max; ++k) {
    r.inequality.push_back(lemma1_bound(k, in.n, in.p, in.m_sigma, in.sigma));
    r.inequality_ok = r.inequality_ok && r.inequality.back().side_condition;
  }

  const double e = std::exp(-in.sigma * r.r_n);
  r.risk_threshold = 3.0 * r.lambda * r.s;
  if (r.j0) {
    const auto j = static_cast<double>(*r.j0);
    r.sparsity_tail_bound = j * e;
    r.risk_tail_bound = (1.0 + j) * e;
    r.mean_risk_bound = r.risk_tail_bound + r.risk_threshold;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.sparsity_tail_bound = r.risk_tail_bound = r.mean_risk_bound = nan;
  }
  if (!r.condition_c_ok) r.notes.push_back("c is below 2 sqrt(M_sigma) (1 + eps) / eps");
  if (!r.inequality_ok) r.notes.push_back("the side inequality fails for some k in range");
  return r;
}

namespace {

nlohmann::json num(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string to_json(const TheoryReport& r, int indent) {
  nlohmann::json j;
  j["inputs"] = {{"q", r.inputs.q},         {"epsilon", r.inputs.epsilon}, {"sigma", r.inputs.sigma},
                 {"M_sigma", r.inputs.m_sigma}, {"c", r.inputs.c},        {"n", r.inputs.n},
                 {"p", r.inputs.p}};
  j["lambda"] = r.lambda;
  j["m0"] = r.m0;
  j["r_n"] = r.r_n;
  j["s"] = r.s;
  j["j0"] = r.j0 ? nlohmann::json(*r.j0) : nlohmann::json(nullptr);
  j["delta_theory"] = r.delta_theory;
  j["c_required"] = r.c_required;
  j["condition_c_ok"] = r.condition_c_ok;
  j["k_range"] = {r.k_min, r.k_max};
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& b : r.inequality) {
    ks.push_back({{"k", b.k}, {"lhs", b.side_lhs}, {"rhs", b.side_rhs}, {"ok", b.side_condition}});
  }
  j["inequality"] = ks;
  j["inequality_ok"] = r.inequality_ok;
  j["sparsity_tail_bound"] = num(r.sparsity_tail_bound);
  j["risk_tail_bound"] = num(r.risk_tail_bound);
  j["risk_threshold"] = num(r.risk_threshold);
  j["mean_risk_bound"] = num(r.mean_risk_bound);
  j["notes"] = r.notes;
  return j.dump(indent);
}

std::string to_text(const TheoryReport& r) {
  std::string s;
  s += fmt::format("inputs: q={} eps={} sigma={} M_sigma={} c={} n={} p={}\n", r.inputs.q, r.inputs.epsilon,
                   r.inputs.sigma, r.inputs.m_sigma, r.inputs.c, r.inputs.n, r.inputs.p);
  s += fmt::format("lambda              {:.12g}\n", r.lambda);
  s += fmt::format("m0                  {}\n", r.m0);
  s += fmt::format("r_n                 {:.12g}\n", r.r_n);
  s += fmt::format("s                   {:.12g}\n", r.s);
  s += fmt::format("j0                  {}\n", r.j0 ? fmt::format("{}", *r.j0) : std::string("undefined"));
  s += fmt::format("2 sqrt(M)/c         {:.12g}\n", r.delta_theory);
  s += fmt::format("{:<20}{}\n", fmt::format("c >= {:.6g}", r.c_required), r.condition_c_ok ? "yes" : "no");
  s += fmt::format("{:<20}side inequality {}\n", fmt::format("k in [{}, {}]", r.k_min, r.k_max),
                   r.inequality_ok ? "holds" : "fails");
  s += fmt::format("P(|theta|_0 > s) <= {:.12g}\n", r.sparsity_tail_bound);
  s += fmt::format("P(U_n > {:.6g}) <= {:.12g}\n", r.risk_threshold, r.risk_tail_bound);
  s += fmt::format("E[U_n] <= {:.12g}\n", r.mean_risk_bound);
  for (const auto& note : r.notes) s += "note: " + note + "\n";
  return s;
}

std::int64_t floor_s_rational(std::int64_t q, std::int64_t a, std::int64_t b) {
  if (b <= 0 || a < 0) throw std::invalid_argument("epsilon must be a nonnegative fraction a/b");
  // s = q + a (q + 1) / b
  return q + (a * (q + 1)) / b;
}

EmpiricalTheoryCheck empirical_theory_check(const TheoryReport& report,
                                            const std::vector<std::size_t>& support_sizes,
                                            const std::vector<double>& excess_risks) {
  if (support_sizes.size() != excess_risks.size() || support_sizes.empty()) {
    throw std::invalid_argument("need one support size and one excess risk per repetition");
  }
  EmpiricalTheoryCheck out;
  out.reps = support_sizes.size();
  for (std::size_t k = 0; k < out.reps; ++k) {
    out.freq_support_above_s += static_cast<double>(support_sizes[k]) > report.s ? 1.0 : 0.0;
    out.freq_excess_risk_above += excess_risks[k] > report.risk_threshold ? 1.0 : 0.0;
    out.mean_excess_risk += excess_risks[k];
  }
  const auto r = static_cast<double>(out.reps);
  out.freq_support_above_s /= r;
  out.freq_excess_risk_above /= r;
  out.mean_excess_risk /= r;
  return out;
}

}  // namespace l0erm
