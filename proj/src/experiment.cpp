#include "l0erm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "l0erm/erm.hpp"
#include "l0erm/io.hpp"
#include "l0erm/lasso.hpp"
#include "l0erm/tuning.hpp"

namespace l0erm {

std::string to_string(Method m) {
  switch (m) {
    case Method::kL0Erm: return "l0erm";
    case Method::kLassoOpt: return "lasso_opt";
    case Method::kLasso1se: return "lasso_1se";
    case Method::kInterceptOnly: return "intercept_only";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "l0erm") return Method::kL0Erm;
  if (s == "lasso_opt") return Method::kLassoOpt;
  if (s == "lasso_1se") return Method::kLasso1se;
  if (s == "intercept_only") return Method::kInterceptOnly;
  throw std::invalid_argument(fmt::format("unknown method '{}'", s));
}

std::string to_string(TuningMode m) {
  switch (m) {
    case TuningMode::kHeuristic: return "heuristic";
    case TuningMode::kCondition2: return "condition2";
    case TuningMode::kFixed: return "fixed";
    case TuningMode::kCv: return "cv";
  }
  return "?";
}

TuningMode parse_tuning(const std::string& s) {
  if (s == "heuristic") return TuningMode::kHeuristic;
  if (s == "condition2") return TuningMode::kCondition2;
  if (s == "fixed") return TuningMode::kFixed;
  if (s == "cv") return TuningMode::kCv;
  throw std::invalid_argument(fmt::format("unknown tuning mode '{}'", s));
}

void ExperimentConfig::validate() const {
  DgpSpec::make(variant, p);
  if (n_train < 1 || n_valid < 1 || reps < 1) throw std::invalid_argument("counts must be positive");
  if (methods.empty()) throw std::invalid_argument("no methods selected");
  if (!(time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (node_limit < 1) throw std::invalid_argument("node limit must be positive");
  if (!(box_lower < box_upper)) throw std::invalid_argument("box lower bound must be below the upper bound");
  if (tuning == TuningMode::kFixed && !(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (tuning == TuningMode::kCondition2 && !(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (lasso_folds < 2 || static_cast<std::size_t>(lasso_folds) > n_train) {
    throw std::invalid_argument("lasso folds must lie in [2, n_train]");
  }
}

std::size_t effective_workers(std::size_t requested) {
  if (const char* env = std::getenv("L0ERM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(requested, 1);
}

namespace {

bool uses_lasso(const ExperimentConfig& c) {
  return std::any_of(c.methods.begin(), c.methods.end(),
                     [](Method m) { return m == Method::kLassoOpt || m == Method::kLasso1se; });
}

double l0_lambda(const ExperimentConfig& cfg, const Dataset& train, const ParameterBox& box, std::size_t rep) {
  switch (cfg.tuning) {
    case TuningMode::kHeuristic: return lambda_heuristic(train.n(), train.p(), heuristic_v(train));
    case TuningMode::kCondition2: return lambda_condition2(cfg.c, train.n(), train.p());
    case TuningMode::kFixed: return cfg.lambda;
    case TuningMode::kCv: {
      CvTuningOptions o;
      o.seed = make_stream(cfg.seed, rep, StreamPurpose::kAux)();
      o.fit.limits.time_limit = cfg.time_limit;
      o.fit.limits.node_limit = cfg.node_limit;
      return tune_v_by_cv(train, box, o).lambda;
    }
  }
  return 0.0;
}

double risk_of(const ExperimentConfig& cfg, const GeneratedSample& s, std::span<const double> theta) {
  return cfg.analytic_risk ? analytic_risk(s.dataset, s.eta, theta) : empirical_risk(s.dataset, theta);
}

}  // namespace

RepetitionOutcome run_repetition(const ExperimentConfig& cfg, std::size_t rep) {
  const DgpSpec spec = DgpSpec::make(cfg.variant, cfg.p);
  const auto train = generate(spec, cfg.n_train, cfg.seed, rep, StreamPurpose::kTrain);
  const auto valid = generate(spec, cfg.n_valid, cfg.seed, rep, StreamPurpose::kValidation);
  const ParameterBox box = ParameterBox::uniform(cfg.p, cfg.box_lower, cfg.box_upper);
  const auto& theta_star = train.theta_star;
  const double bayes_in = risk_of(cfg, train, theta_star);
  const double bayes_out = risk_of(cfg, valid, theta_star);

  RepetitionOutcome out;
  out.rep = rep;
  auto base = [&](Method m) {
    MethodOutcome o;
    o.method = m;
    o.record.bayes_in_risk = bayes_in;
    o.record.bayes_out_risk = bayes_out;
    return o;
  };

  // Lasso first so its classifiers can seed the l0 fit.
  std::optional<CvResult> cv;
  std::string cv_error;
  double cv_seconds = 0.0;
  if (uses_lasso(cfg)) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      CvOptions o;
      o.folds = cfg.lasso_folds;
      o.stratified = cfg.stratified_folds;
      o.seed = make_stream(cfg.seed, rep, StreamPurpose::kFolds)();
      cv = cross_validate(train.dataset, o);
    } catch (const std::exception& e) {
      cv_error = e.what();
    }
    cv_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::vector<std::vector<double>> lasso_starts;

  for (Method m : cfg.methods) {
    if (m != Method::kLassoOpt && m != Method::kLasso1se) continue;
    MethodOutcome o = base(m);
    if (!cv) {
      o.error = cv_error;
      out.methods.push_back(std::move(o));
      continue;
    }
    const std::size_t idx = m == Method::kLassoOpt ? cv->opt_index : cv->one_se_index;
    const LassoFit& fit = cv->path.fits[idx];
    const auto norm = normalize_to_classifier(fit);
    o.ok = true;
    o.lambda = cv->lambdas[idx];
    o.theta = norm.classifier.theta;
    o.record.selected = selected_indices(o.theta, cfg.selection_tol);
    if (norm.degenerate) {
      o.record.in_risk = lasso_misclassification(fit, train.dataset);
      o.record.out_risk = lasso_misclassification(fit, valid.dataset);
      o.solver_status = "degenerate_beta1";
    } else {
      o.record.in_risk = risk_of(cfg, train, o.theta);
      o.record.out_risk = risk_of(cfg, valid, o.theta);
      o.solver_status = norm.negative_beta1 ? "negative_beta1" : "ok";
      lasso_starts.push_back(o.theta);
    }
    o.record.runtime = cv_seconds;
    out.methods.push_back(std::move(o));
  }

  for (Method m : cfg.methods) {
    if (m == Method::kLassoOpt || m == Method::kLasso1se) continue;
    MethodOutcome o = base(m);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (m == Method::kL0Erm) {
        o.lambda = l0_lambda(cfg, train.dataset, box, rep);
        FitOptions fo;
        fo.limits.time_limit = cfg.time_limit;
        fo.limits.node_limit = cfg.node_limit;
        fo.limits.gap_tol = cfg.gap_tol;
        fo.selection_tol = cfg.selection_tol;
        if (cfg.lasso_warm_start) fo.warm_starts = lasso_starts;
        const FitResult fit = fit_penalized(train.dataset, box, o.lambda, fo);
        o.theta = fit.theta_hat;
        o.record.selected = fit.selected;
        o.record.solver_gap = fit.solver.relative_gap;
        o.solver_status = milp::to_string(fit.solver.status);
        o.nodes = fit.solver.nodes;
      } else {
        const auto f = fit_intercept_only(train.dataset, cfg.box_lower, cfg.box_upper);
        o.theta.assign(cfg.p, 0.0);
        o.theta[0] = f.t_star;
        o.solver_status = "ok";
      }
      o.record.in_risk = risk_of(cfg, train, o.theta);
      o.record.out_risk = risk_of(cfg, valid, o.theta);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    o.record.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.methods.push_back(std::move(o));
  }
  // Report in the configured method order.
  std::vector<MethodOutcome> ordered;
  for (Method m : cfg.methods) {
    for (auto& o : out.methods)
      if (o.method == m) ordered.push_back(o);
  }
  out.methods = std::move(ordered);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.reps.resize(cfg.reps);
  const std::size_t workers = std::min(effective_workers(cfg.workers), cfg.reps);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t rep = next.fetch_add(1);
      if (rep >= cfg.reps) return;
      try {
        result.reps[rep] = run_repetition(cfg, rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *progress << fmt::format("rep {}/{} done\n", rep + 1, cfg.reps) << std::flush;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    MethodSummary s;
    s.method = cfg.methods[k];
    s.selection_applicable = s.method != Method::kInterceptOnly;
    std::vector<RepetitionRecord> ok;
    for (const auto& r : result.reps) {
      const auto& o = r.methods[k];
      if (o.ok) {
        ok.push_back(o.record);
        ++s.successes;
      } else {
        ++s.failures;
      }
    }
    if (!ok.empty()) s.report = aggregate(ok);
    if (!s.selection_applicable) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      s.report.corr_sel = s.report.orac_sel = s.report.num_irrel = s.report.num_irrel_without_intercept = nan;
    }
    result.summaries.push_back(s);
  }
  return result;
}

namespace {

std::string cell(double v, int digits) {
  if (std::isnan(v)) return "-";
  return fmt::format("{:.{}f}", v, digits);
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{:.6f}", v);
}

}  // namespace

std::string render_summary_table(const ExperimentResult& r) {
  const auto& c = r.config;
  std::string s = fmt::format("design {}  p={}  n={}  validation={}  reps={}  seed={}  tuning={}\n",
                              to_string(c.variant), c.p, c.n_train, c.n_valid, c.reps, c.seed,
                              to_string(c.tuning));
  s += fmt::format("{:<12}", "");
  for (const auto& m : r.summaries) s += fmt::format("{:>16}", to_string(m.method));
  s += "\n";
  auto row = [&](const char* name, auto get, int digits) {
    s += fmt::format("{:<12}", name);
    for (const auto& m : r.summaries) {
      s += fmt::format("{:>16}", m.successes ? cell(get(m.report), digits) : std::string("-"));
    }
    s += "\n";
  };
  row("Corr_sel", [](const MetricsReport& m) { return m.corr_sel; }, 2);
  row("Orac_sel", [](const MetricsReport& m) { return m.orac_sel; }, 2);
  row("Num_irrel", [](const MetricsReport& m) { return m.num_irrel; }, 2);
  row("in_RR", [](const MetricsReport& m) { return m.in_rr; }, 3);
  row("out_RR", [](const MetricsReport& m) { return m.out_rr; }, 3);
  s += fmt::format("{:<12}", "successes");
  for (const auto& m : r.summaries) s += fmt::format("{:>16}", fmt::format("{}/{}", m.successes, r.config.reps));
  s += "\n";
  return s;
}

std::string render_summary_csv(const ExperimentResult& r) {
  std::string s =
      "method,p,reps,successes,corr_sel,orac_sel,num_irrel,num_irrel_without_intercept,in_rr,out_rr,"
      "undefined_ratios\n";
  for (const auto& m : r.summaries) {
    const auto& x = m.report;
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", to_string(m.method), r.config.p, r.config.reps,
                     m.successes, csv_num(x.corr_sel), csv_num(x.orac_sel), csv_num(x.num_irrel),
                     csv_num(x.num_irrel_without_intercept), m.successes ? csv_num(x.in_rr) : "",
                     m.successes ? csv_num(x.out_rr) : "", x.undefined_ratios);
  }
  return s;
}

std::string render_repetitions_csv(const ExperimentResult& r) {
  std::string s = "rep,method,ok,lambda,in_risk,out_risk,bayes_in_risk,bayes_out_risk,n_selected,selected,status,theta\n";
  for (const auto& rep : r.reps) {
    for (const auto& o : rep.methods) {
      std::string sel, theta;
      for (std::size_t k = 0; k < o.record.selected.size(); ++k) sel += (k ? ";" : "") + fmt::format("{}", o.record.selected[k] + 1);
      for (std::size_t k = 0; k < o.theta.size(); ++k) theta += (k ? ";" : "") + format_number(o.theta[k]);
      std::string status = o.ok ? o.solver_status : "failed: " + o.error;
      std::replace(status.begin(), status.end(), ',', ' ');
      std::replace(status.begin(), status.end(), '\n', ' ');
      s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", rep.rep, to_string(o.method), o.ok ? 1 : 0,
                       format_number(o.lambda), format_number(o.record.in_risk), format_number(o.record.out_risk),
                       format_number(o.record.bayes_in_risk), format_number(o.record.bayes_out_risk),
                       o.record.selected.size(), sel, status, theta);
    }
  }
  return s;
}

std::string render_timing_csv(const ExperimentResult& r) {
  std::string s = "rep,method,seconds,nodes,relative_gap\n";
  for (const auto& rep : r.reps) {
    for (const auto& o : rep.methods) {
      s += fmt::format("{},{},{:.3f},{},{}\n", rep.rep, to_string(o.method), o.record.runtime, o.nodes,
                       format_number(o.record.solver_gap));
    }
  }
  return s;
}

void write_experiment_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_text_file(dir / "summary.txt", render_summary_table(r));
  write_text_file(dir / "summary.csv", render_summary_csv(r));
  write_text_file(dir / "repetitions.csv", render_repetitions_csv(r));
  write_text_file(dir / "timing.csv", render_timing_csv(r));
  const std::string all = render_summary_csv(r);
  const auto header_end = all.find('\n') + 1;
  std::size_t pos = header_end;
  for (const auto& m : r.summaries) {
    const auto end = all.find('\n', pos) + 1;
    write_text_file(dir / fmt::format("metrics_{}.csv", to_string(m.method)),
                    all.substr(0, header_end) + all.substr(pos, end - pos));
    pos = end;
  }
}

}  // namespace l0erm
