#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "l0erm/dgp.hpp"
#include "l0erm/metrics.hpp"

namespace l0erm {

enum class Method { kL0Erm, kLassoOpt, kLasso1se, kInterceptOnly };
enum class TuningMode { kHeuristic, kCondition2, kFixed, kCv };

std::string to_string(Method m);
Method parse_method(const std::string& s);
std::string to_string(TuningMode m);
TuningMode parse_tuning(const std::string& s);

struct ExperimentConfig {
  DgpVariant variant = DgpVariant::kI;
  std::size_t p = 10;
  std::size_t n_train = 100;
  std::size_t n_valid = 5000;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  double time_limit = 60.0;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  double gap_tol = 0.0;
  TuningMode tuning = TuningMode::kHeuristic;
  double c = 1.0;          // condition-2 constant
  double lambda = 0.0;     // fixed lambda
  double box_lower = -10.0;
  double box_upper = 10.0;
  std::vector<Method> methods{Method::kL0Erm, Method::kLassoOpt, Method::kLasso1se};
  std::size_t workers = 1;
  int lasso_folds = 10;
  bool stratified_folds = false;
  double selection_tol = kSelectionTol;
  bool analytic_risk = false;
  // Seed the l0 fit with the normalized lasso classifiers when both run.
  bool lasso_warm_start = true;

  void validate() const;
};

// Worker count after the L0ERM_WORKERS environment override.
std::size_t effective_workers(std::size_t requested);

struct MethodOutcome {
  Method method = Method::kL0Erm;
  bool ok = false;
  std::string error;
  double lambda = 0.0;
  std::vector<double> theta;
  RepetitionRecord record;
  std::string solver_status;
  std::int64_t nodes = 0;
};

struct RepetitionOutcome {
  std::size_t rep = 0;
  std::vector<MethodOutcome> methods;
};

struct MethodSummary {
  Method method = Method::kL0Erm;
  std::size_t successes = 0;
  std::size_t failures = 0;
  bool selection_applicable = true;
  MetricsReport report;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RepetitionOutcome> reps;
  std::vector<MethodSummary> summaries;
};

RepetitionOutcome run_repetition(const ExperimentConfig& config, std::size_t rep);
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* progress = nullptr);

// Tables in the layout of the simulation tables: one column per method, rows
// Corr_sel, Orac_sel, Num_irrel, in_RR, out_RR.
std::string render_summary_table(const ExperimentResult& result);
std::string render_summary_csv(const ExperimentResult& result);
std::string render_repetitions_csv(const ExperimentResult& result);
std::string render_timing_csv(const ExperimentResult& result);

// summary.txt, summary.csv, metrics_<method>.csv, repetitions.csv, timing.csv.
void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace l0erm
