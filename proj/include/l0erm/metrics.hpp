#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "l0erm/core.hpp"

namespace l0erm {

struct RiskRatio {
  double value = 0.0;
  bool defined = true;  // false when the Bayes risk is zero
  double classifier_risk = 0.0;
  double bayes_risk = 0.0;
};

RiskRatio relative_risk(double classifier_risk, double bayes_risk);

// Mean over rows of P(Y != b(X) | X) computed from eta; an optional
// lower-variance alternative to the empirical validation risk.
double analytic_risk(const Dataset& data, std::span<const double> eta, std::span<const double> theta);

struct RepetitionRecord {
  double in_risk = 0.0;
  double out_risk = 0.0;
  double bayes_in_risk = 0.0;
  double bayes_out_risk = 0.0;
  std::vector<std::size_t> selected;
  double runtime = 0.0;
  double solver_gap = 0.0;
};

struct SelectionMetrics {
  double corr_sel = 0.0;
  double orac_sel = 0.0;
  double num_irrel = 0.0;                 // intercept counted as irrelevant
  double num_irrel_without_intercept = 0.0;
};

// `relevant` is the single truly active coordinate, `intercept` the constant
// column. Selected sets hold coordinates already judged above tolerance.
SelectionMetrics selection_metrics(const std::vector<std::vector<std::size_t>>& selected,
                                   std::size_t relevant = 1, std::size_t intercept = 0);

struct MetricsReport {
  double in_rr = 0.0;
  double out_rr = 0.0;
  double corr_sel = 0.0;
  double orac_sel = 0.0;
  double num_irrel = 0.0;
  double num_irrel_without_intercept = 0.0;
  double mean_runtime = 0.0;
  double mean_gap = 0.0;
  std::size_t reps = 0;
  std::size_t undefined_ratios = 0;  // reps skipped in the RR means
};

MetricsReport aggregate(const std::vector<RepetitionRecord>& records, std::size_t relevant = 1,
                        std::size_t intercept = 0);

struct LabeledReport {
  std::string method;
  std::size_t p = 0;
  MetricsReport report;
};

std::string render_table(const std::vector<LabeledReport>& rows);
std::string render_csv(const std::vector<LabeledReport>& rows);

}  // namespace l0erm
