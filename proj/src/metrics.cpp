#include "l0erm/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace l0erm {

RiskRatio relative_risk(double classifier_risk, double bayes_risk) {
  RiskRatio r;
  r.classifier_risk = classifier_risk;
  r.bayes_risk = bayes_risk;
  if (!(bayes_risk > 0.0)) {
    r.defined = false;
    r.value = 0.0;
    return r;
  }
  r.value = classifier_risk / bayes_risk;
  return r;
}

double analytic_risk(const Dataset& data, std::span<const double> eta, std::span<const double> theta) {
  if (eta.size() != data.n()) throw std::invalid_argument("eta length does not match the data");
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    total += score(data, i, theta) >= 0.0 ? 1.0 - eta[i] : eta[i];
  }
  return total / static_cast<double>(data.n());
}

SelectionMetrics selection_metrics(const std::vector<std::vector<std::size_t>>& selected,
                                   std::size_t relevant, std::size_t intercept) {
  if (selected.empty()) throw std::invalid_argument("selection metrics need at least one repetition");
  SelectionMetrics m;
  for (const auto& s : selected) {
    const bool hit = std::find(s.begin(), s.end(), relevant) != s.end();
    const auto others = static_cast<double>(s.size()) - (hit ? 1.0 : 0.0);
    const bool has_intercept = std::find(s.begin(), s.end(), intercept) != s.end();
    m.corr_sel += hit ? 1.0 : 0.0;
    m.orac_sel += (hit && s.size() == 1) ? 1.0 : 0.0;
    m.num_irrel += others;
    m.num_irrel_without_intercept += others - (has_intercept ? 1.0 : 0.0);
  }
  const auto r = static_cast<double>(selected.size());
  m.corr_sel /= r;
  m.orac_sel /= r;
  m.num_irrel /= r;
  m.num_irrel_without_intercept /= r;
  return m;
}

MetricsReport aggregate(const std::vector<RepetitionRecord>& records, std::size_t relevant,
                        std::size_t intercept) {
  if (records.empty()) throw std::invalid_argument("aggregate needs at least one record");
  MetricsReport out;
  out.reps = records.size();
  std::vector<std::vector<std::size_t>> sets;
  std::size_t in_count = 0, out_count = 0;
  for (const auto& r : records) {
    sets.push_back(r.selected);
    const auto in = relative_risk(r.in_risk, r.bayes_in_risk);
    const auto ou = relative_risk(r.out_risk, r.bayes_out_risk);
    if (in.defined) {
      out.in_rr += in.value;
      ++in_count;
    }
    if (ou.defined) {
      out.out_rr += ou.value;
      ++out_count;
    }
    if (!in.defined || !ou.defined) ++out.undefined_ratios;
    out.mean_runtime += r.runtime;
    out.mean_gap += r.solver_gap;
  }
  if (in_count) out.in_rr /= static_cast<double>(in_count);
  if (out_count) out.out_rr /= static_cast<double>(out_count);
  out.mean_runtime /= static_cast<double>(records.size());
  out.mean_gap /= static_cast<double>(records.size());
  const auto sel = selection_metrics(sets, relevant, intercept);
  out.corr_sel = sel.corr_sel;
  out.orac_sel = sel.orac_sel;
  out.num_irrel = sel.num_irrel;
  out.num_irrel_without_intercept = sel.num_irrel_without_intercept;
  return out;
}

std::string render_table(const std::vector<LabeledReport>& rows) {
  std::string s = fmt::format("{:<14} {:>5} {:>9} {:>9} {:>10} {:>8} {:>8} {:>6}\n", "method", "p",
                              "Corr_sel", "Orac_sel", "Num_irrel", "in_RR", "out_RR", "reps");
  for (const auto& r : rows) {
    const auto& m = r.report;
    s += fmt::format("{:<14} {:>5} {:>9.2f} {:>9.2f} {:>10.2f} {:>8.3f} {:>8.3f} {:>6}\n", r.method, r.p,
                     m.corr_sel, m.orac_sel, m.num_irrel, m.in_rr, m.out_rr, m.reps);
  }
  return s;
}

std::string render_csv(const std::vector<LabeledReport>& rows) {
  std::string s =
      "method,p,reps,corr_sel,orac_sel,num_irrel,num_irrel_without_intercept,in_rr,out_rr,undefined_ratios\n";
  for (const auto& r : rows) {
    const auto& m = r.report;
    s += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.method, r.p, m.reps,
                     m.corr_sel, m.orac_sel, m.num_irrel, m.num_irrel_without_intercept, m.in_rr,
                     m.out_rr, m.undefined_ratios);
  }
  return s;
}

}  // namespace l0erm
