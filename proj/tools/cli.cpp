#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "l0erm/dgp.hpp"
#include "l0erm/erm.hpp"
#include "l0erm/experiment.hpp"
#include "l0erm/io.hpp"
#include "l0erm/lasso.hpp"
#include "l0erm/theory.hpp"
#include "l0erm/tuning.hpp"

namespace l0erm::cli {
namespace {

namespace fs = std::filesystem;

// Wraps the solver-side failures so they map to exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};


struct SimulateArgs {
  std::string design = "i";
  std::size_t p = 10;
  std::size_t n = 100;
  std::size_t n_valid = 5000;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  std::string out;
};

struct FitArgs {
  std::string data;
  std::string method = "l0erm";
  std::optional<double> lambda;
  std::string tuning = "heuristic";
  double c = 1.0;
  std::optional<int> max_features;
  double time_limit = 60.0;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  double gap_tol = 0.0;
  double box_lower = -10.0;
  double box_upper = 10.0;
  int folds = 10;
  std::uint64_t seed = 1;
  std::string out;
  std::string export_lp;
};

struct ExperimentArgs {
  std::string design = "i";
  std::string tuning = "heuristic";
  std::vector<std::string> methods{"l0erm", "lasso_opt", "lasso_1se"};
  std::string out = "results";
  bool quiet = false;
  ExperimentConfig cfg;
};

struct TheoryArgs {
  TheoryInputs in;
  std::string json;
  bool json_stdout = false;
  bool empirical = false;
  std::string design = "i";
  std::size_t reps = 20;
  std::size_t n_valid = 5000;
  std::uint64_t seed = 1;
  double time_limit = 60.0;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  std::size_t workers = 1;
};

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const DgpSpec spec = DgpSpec::make(parse_variant(a.design), a.p);
  if (a.n < 1 || a.n_valid < 1 || a.reps < 1) throw std::invalid_argument("counts must be positive");
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", a.out, ec.message()));
  nlohmann::json manifest;
  manifest["design"] = to_string(spec.variant);
  manifest["p"] = spec.p;
  manifest["n_train"] = a.n;
  manifest["n_valid"] = a.n_valid;
  manifest["seed"] = a.seed;
  manifest["theta_star"] = bayes_classifier(spec).theta;
  manifest["covariance_rho"] = spec.covariance_rho;
  manifest["base_scale"] = spec.base_scale;
  manifest["files"] = nlohmann::json::array();
  for (std::size_t r = 0; r < a.reps; ++r) {
    const auto train = generate(spec, a.n, a.seed, r, StreamPurpose::kTrain);
    const auto valid = generate(spec, a.n_valid, a.seed, r, StreamPurpose::kValidation);
    const std::string tn = fmt::format("train_rep{}.csv", r);
    const std::string vn = fmt::format("valid_rep{}.csv", r);
    write_dataset_csv(fs::path(a.out) / tn, train.dataset, &train.eta);
    write_dataset_csv(fs::path(a.out) / vn, valid.dataset, &valid.eta);
    manifest["files"].push_back({{"rep", r}, {"train", tn}, {"validation", vn}});
  }
  write_text_file(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
  out << fmt::format("wrote {} repetition(s) to {}\n", a.reps, a.out);
  return kExitOk;
}

nlohmann::json lasso_entry(const CvResult& cv, std::size_t idx, double tol) {
  const auto& fit = cv.path.fits[idx];
  const auto norm = normalize_to_classifier(fit);
  nlohmann::json j;
  j["lambda"] = cv.lambdas[idx];
  j["cv_risk"] = cv.mean_risk[idx];
  j["cv_se"] = cv.se[idx];
  j["beta1"] = fit.beta1;
  j["raw_theta"] = fit.theta;
  j["theta_hat"] = norm.classifier.theta;
  j["degenerate"] = norm.degenerate;
  j["negative_beta1"] = norm.negative_beta1;
  j["selected"] = selected_indices(norm.classifier.theta, tol);
  j["converged"] = fit.converged;
  return j;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const LoadedDataset loaded = read_dataset_csv(a.data);
  const Dataset& data = loaded.data;
  nlohmann::json j;
  j["data"] = a.data;
  j["method"] = a.method;
  j["n"] = data.n();
  j["p"] = data.p();
  if (a.method == "intercept_only") {
    const auto f = fit_intercept_only(data, a.box_lower, a.box_upper);
    j["h"] = f.h;
    j["t_star"] = f.t_star;
  } else if (a.method == "lasso") {
    CvOptions o;
    o.folds = a.folds;
    o.seed = a.seed;
    const auto cv = cross_validate(data, o);
    j["lambda_opt"] = cv.lambda_opt;
    j["lambda_1se"] = cv.lambda_1se;
    j["opt"] = lasso_entry(cv, cv.opt_index, kSelectionTol);
    j["one_se"] = lasso_entry(cv, cv.one_se_index, kSelectionTol);
    j["warnings"] = cv.warnings;
  } else if (a.method == "l0erm") {
    const ParameterBox box = ParameterBox::uniform(data.p(), a.box_lower, a.box_upper);
    FitOptions fo;
    fo.limits.time_limit = a.time_limit;
    fo.limits.node_limit = a.node_limit;
    fo.limits.gap_tol = a.gap_tol;
    std::vector<std::string> warnings;
    double lambda = 0.0;
    if (a.max_features) {
      j["tuning"] = "cardinality";
    } else if (a.lambda) {
      lambda = *a.lambda;
      j["tuning"] = "explicit";
    } else if (a.tuning == "heuristic") {
      const double v = heuristic_v(data);
      lambda = lambda_heuristic(data.n(), data.p(), v, &warnings);
      j["tuning"] = "heuristic";
      j["v"] = v;
    } else if (a.tuning == "condition2") {
      lambda = lambda_condition2(a.c, data.n(), data.p(), &warnings);
      j["tuning"] = "condition2";
      j["c"] = a.c;
    } else {
      throw std::invalid_argument(fmt::format("unknown tuning mode '{}'", a.tuning));
    }
    if (!a.export_lp.empty()) {
      const auto model = a.max_features ? build_constrained_milp(data, box, *a.max_features, fo.delta)
                                        : build_penalized_milp(data, box, lambda, fo.delta);
      try {
        milp::write_lp_file(model.problem, a.export_lp);
      } catch (const std::exception& e) {
        throw IoError(e.what());
      }
    }
    FitResult fit;
    try {
      fit = a.max_features ? fit_constrained(data, box, *a.max_features, fo) : fit_penalized(data, box, lambda, fo);
    } catch (const FitFailure& e) {
      throw SolverError(e.what());
    }
    j["fit"] = to_json(fit);
    j["warnings"] = warnings;
  } else {
    throw std::invalid_argument(fmt::format("unknown method '{}', expected l0erm, lasso or intercept_only", a.method));
  }
  if (a.out.empty() || a.out == "-") {
    out << j.dump() << "\n";
  } else {
    append_json_line(a.out, j);
  }
  return kExitOk;
}

int cmd_experiment(ExperimentArgs a, std::ostream& out, std::ostream& err) {
  a.cfg.variant = parse_variant(a.design);
  a.cfg.tuning = parse_tuning(a.tuning);
  a.cfg.methods.clear();
  for (const auto& m : a.methods) a.cfg.methods.push_back(parse_method(m));
  a.cfg.validate();
  const auto result = run_experiment(a.cfg, a.quiet ? nullptr : &err);
  write_experiment_outputs(result, a.out);
  out << render_summary_table(result);
  for (const auto& s : result.summaries) {
    if (s.successes == 0) {
      err << fmt::format("method {} failed on every repetition\n", to_string(s.method));
      return kExitSolver;
    }
  }
  return kExitOk;
}

int cmd_theory(const TheoryArgs& a, std::ostream& out, std::ostream& err) {
  const auto report = theory_report(a.in);
  std::string text = to_text(report);
  nlohmann::json j = nlohmann::json::parse(to_json(report));
  if (a.empirical) {
    ExperimentConfig cfg;
    cfg.variant = parse_variant(a.design);
    cfg.p = a.in.p;
    cfg.n_train = a.in.n;
    cfg.n_valid = a.n_valid;
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.time_limit = a.time_limit;
    cfg.node_limit = a.node_limit;
    cfg.tuning = TuningMode::kCondition2;
    cfg.c = a.in.c;
    cfg.methods = {Method::kL0Erm};
    cfg.workers = a.workers;
    const auto result = run_experiment(cfg, &err);
    std::vector<std::size_t> sizes;
    std::vector<double> excess;
    for (const auto& r : result.reps) {
      const auto& o = r.methods.front();
      if (!o.ok) continue;
      sizes.push_back(o.record.selected.size());
      excess.push_back(o.record.out_risk - o.record.bayes_out_risk);
    }
    if (sizes.empty()) throw SolverError("every empirical repetition failed");
    const auto e = empirical_theory_check(report, sizes, excess);
    j["empirical"] = {{"reps", e.reps},
                      {"freq_support_above_s", e.freq_support_above_s},
                      {"freq_excess_risk_above_threshold", e.freq_excess_risk_above},
                      {"mean_excess_risk", e.mean_excess_risk},
                      {"conditions_met", report.condition_c_ok && report.inequality_ok}};
    text += fmt::format("empirical ({} reps): P(|theta|_0 > s) ~ {:.4f}   P(U_n > 3 lambda s) ~ {:.4f}   mean U_n ~ {:.5f}\n",
                        e.reps, e.freq_support_above_s, e.freq_excess_risk_above, e.mean_excess_risk);
    if (!(report.condition_c_ok && report.inequality_ok)) {
      text += "note: conditions on c or the side inequality fail, the comparison is informational\n";
    }
  }
  if (a.json_stdout) {
    out << j.dump(2) << "\n";
  } else {
    out << text;
  }
  if (!a.json.empty()) write_text_file(a.json, j.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"l0-penalized ERM for binary classification: simulation, fitting and bound diagnostics"};
  app.name("l0erm");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "configuration file; experiment keys go under an [experiment] section");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "generate training and validation samples");
  sim->add_option("--design", sa.design, "design i or ii")->check(CLI::IsMember({"i", "ii"}))->capture_default_str();
  sim->add_option("--p", sa.p, "dimension of theta (constant column included)")->capture_default_str();
  sim->add_option("--n", sa.n, "training size")->capture_default_str();
  sim->add_option("--n-valid", sa.n_valid, "validation size")->capture_default_str();
  sim->add_option("--reps", sa.reps, "repetitions")->capture_default_str();
  sim->add_option("--seed", sa.seed, "master seed")->capture_default_str();
  sim->add_option("--out", sa.out, "output directory")->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "fit one method to a dataset CSV");
  fit->add_option("--data", fa.data, "dataset CSV (y,x1,x2,...)")->required();
  fit->add_option("--method", fa.method, "l0erm, lasso or intercept_only")->capture_default_str();
  fit->add_option("--lambda", fa.lambda, "explicit penalty, skips tuning");
  fit->add_option("--tuning", fa.tuning, "heuristic or condition2")->capture_default_str();
  fit->add_option("--c", fa.c, "constant for the condition2 rule")->capture_default_str();
  fit->add_option("--max-features", fa.max_features, "solve the cardinality-constrained form instead");
  fit->add_option("--time-limit", fa.time_limit, "seconds per fit")->capture_default_str();
  fit->add_option("--node-limit", fa.node_limit, "branch-and-bound node cap");
  fit->add_option("--gap-tol", fa.gap_tol, "relative gap to stop at")->capture_default_str();
  fit->add_option("--box-lower", fa.box_lower, "lower bound on every coordinate")->capture_default_str();
  fit->add_option("--box-upper", fa.box_upper, "upper bound on every coordinate")->capture_default_str();
  fit->add_option("--folds", fa.folds, "lasso CV folds")->capture_default_str();
  fit->add_option("--seed", fa.seed, "lasso fold seed")->capture_default_str();
  fit->add_option("--out", fa.out, "append the JSON line here instead of stdout");
  fit->add_option("--export-lp", fa.export_lp, "also write the mixed-integer model in LP format");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Monte Carlo comparison over repetitions");
  exp->add_option("--design", ea.design, "design i or ii")->check(CLI::IsMember({"i", "ii"}))->capture_default_str();
  exp->add_option("--p", ea.cfg.p, "dimension of theta")->capture_default_str();
  exp->add_option("--n-train", ea.cfg.n_train, "training size")->capture_default_str();
  exp->add_option("--n-valid", ea.cfg.n_valid, "validation size")->capture_default_str();
  exp->add_option("--reps", ea.cfg.reps, "repetitions")->capture_default_str();
  exp->add_option("--seed", ea.cfg.seed, "master seed")->capture_default_str();
  exp->add_option("--time-limit", ea.cfg.time_limit, "seconds per l0 fit")->capture_default_str();
  exp->add_option("--node-limit", ea.cfg.node_limit, "node cap per l0 fit");
  exp->add_option("--gap-tol", ea.cfg.gap_tol, "relative gap to stop at")->capture_default_str();
  exp->add_option("--tuning", ea.tuning, "heuristic, condition2, fixed or cv")->capture_default_str();
  exp->add_option("--c", ea.cfg.c, "constant for condition2")->capture_default_str();
  exp->add_option("--lambda", ea.cfg.lambda, "penalty for fixed tuning")->capture_default_str();
  exp->add_option("--box-lower", ea.cfg.box_lower, "parameter box lower bound")->capture_default_str();
  exp->add_option("--box-upper", ea.cfg.box_upper, "parameter box upper bound")->capture_default_str();
  exp->add_option("--methods", ea.methods, "l0erm lasso_opt lasso_1se intercept_only")->capture_default_str();
  exp->add_option("--workers", ea.cfg.workers, "parallel repetitions (L0ERM_WORKERS overrides)")->capture_default_str();
  exp->add_option("--lasso-folds", ea.cfg.lasso_folds, "CV folds for the lasso")->capture_default_str();
  exp->add_flag("--stratified-folds", ea.cfg.stratified_folds, "stratify lasso folds by label");
  exp->add_option("--selection-tol", ea.cfg.selection_tol, "selection threshold")->capture_default_str();
  exp->add_flag("--analytic-risk", ea.cfg.analytic_risk, "evaluate risks from eta instead of labels");
  exp->add_option("--lasso-warm-start", ea.cfg.lasso_warm_start, "seed the l0 fit with lasso classifiers")->capture_default_str();
  exp->add_option("--out", ea.out, "output directory")->capture_default_str();
  exp->add_flag("--quiet", ea.quiet, "no progress lines");

  TheoryArgs ta;
  auto* th = app.add_subcommand("theory", "bound quantities for given constants");
  th->add_option("--q", ta.in.q, "true sparsity")->capture_default_str();
  th->add_option("--epsilon", ta.in.epsilon, "epsilon in (0, 1)")->capture_default_str();
  th->add_option("--sigma", ta.in.sigma, "sigma > 0")->capture_default_str();
  th->add_option("--M-sigma", ta.in.m_sigma, "the universal constant M_sigma (no default exists)")->required();
  th->add_option("--c", ta.in.c, "constant in lambda = c sqrt(ln(p v n) / n)")->capture_default_str();
  th->add_option("--n", ta.in.n, "sample size")->capture_default_str();
  th->add_option("--p", ta.in.p, "dimension")->capture_default_str();
  th->add_option("--json", ta.json, "also write the report as JSON");
  th->add_flag("--format-json", ta.json_stdout, "print JSON instead of text");
  th->add_flag("--empirical", ta.empirical, "attach Monte Carlo frequencies from l0 fits");
  th->add_option("--design", ta.design, "design for --empirical")->check(CLI::IsMember({"i", "ii"}))->capture_default_str();
  th->add_option("--reps", ta.reps, "repetitions for --empirical")->capture_default_str();
  th->add_option("--n-valid", ta.n_valid, "validation size for --empirical")->capture_default_str();
  th->add_option("--seed", ta.seed, "seed for --empirical")->capture_default_str();
  th->add_option("--time-limit", ta.time_limit, "seconds per fit for --empirical")->capture_default_str();
  th->add_option("--node-limit", ta.node_limit, "node cap per fit for --empirical");
  th->add_option("--workers", ta.workers, "parallel repetitions for --empirical")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.back()->help("l0erm"));
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "run with --help for the list of options\n";
    return kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(sa, out);
    if (*fit) return cmd_fit(fa, out);
    if (*exp) return cmd_experiment(ea, out, err);
    if (*th) return cmd_theory(ta, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const milp::SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}

}  // namespace l0erm::cli
