#include "arp/driver.hpp"

#include <cmath>
#include <limits>

#include "arp/errors.hpp"

namespace arp {

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("SolverConfig: ") + what);
  };
  require(p >= 2, "p must be >= 2");
  require(eps1 > 0.0 && eps2 > 0.0, "eps1 and eps2 must be positive");
  require(theta > 0.0, "theta must be positive");
  require(sigma_min > 0.0 && sigma_min <= sigma0, "need 0 < sigma_min <= sigma0");
  require(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0, "need 0 < eta1 <= eta2 < 1");
  require(gamma1 > 0.0 && gamma1 < 1.0 && 1.0 < gamma2 && gamma2 < gamma3,
          "need 0 < gamma1 < 1 < gamma2 < gamma3");
  require(criticality_order == 1 || criticality_order == 2, "criticality_order must be 1 or 2");
  require(max_outer_iterations >= 0 && max_inner_iterations >= 0,
          "iteration caps must be non-negative");
  require(inner_initial_radius > 0.0, "inner_initial_radius must be positive");
}

std::string to_string(Status status) {
  switch (status) {
    case Status::kConverged:
      return "converged";
    case Status::kMaxIterations:
      return "max-iterations";
    case Status::kSubsolverFailure:
      return "subsolver-failure";
  }
  return "unknown";
}

Status status_from_string(const std::string& text) {
  if (text == "converged") return Status::kConverged;
  if (text == "max-iterations") return Status::kMaxIterations;
  if (text == "subsolver-failure") return Status::kSubsolverFailure;
  throw InvalidArgument("unknown status '" + text + "'");
}

int Trace::successful_iterations() const {
  int n = 0;
  for (const IterationRecord& r : records) n += r.successful ? 1 : 0;
  return n;
}

UpdateResult accept_and_update(double f_x, double f_trial, double taylor_decrease, double sigma,
                               const SolverConfig& config) {
  if (!(taylor_decrease > 0.0)) {
    throw InvalidArgument("accept_and_update: Taylor decrease must be positive");
  }
  UpdateResult r;
  r.rho = std::isfinite(f_trial) ? (f_x - f_trial) / taylor_decrease
                                 : -std::numeric_limits<double>::infinity();
  r.successful = r.rho >= config.eta1;
  if (r.rho >= config.eta2) {
    r.sigma_next = std::max(config.sigma_min, config.gamma1 * sigma);
  } else if (r.successful) {
    r.sigma_next = sigma;
  } else {
    r.sigma_next = config.gamma2 * sigma;
  }
  return r;
}

bool termination_check(const CriticalityPair& pair, const SolverConfig& config) {
  if (!(pair.chi1 <= config.eps1)) return false;
  return config.criticality_order == 1 || pair.chi2 <= config.eps2;
}

namespace {

// chi1 first; the eigensolve for chi2 only runs when chi1 passes, unless
// `both` is set.
struct LazyCriticality {
  double chi1 = 0.0;
  std::optional<double> chi2;
};

LazyCriticality measure(const DerivativeBundle& b, const SolverConfig& config, bool both) {
  LazyCriticality c;
  c.chi1 = b.gradient().norm();
  if (both || (config.criticality_order == 2 && c.chi1 <= config.eps1)) {
    c.chi2 = std::max(0.0, -leftmost_eigenpair(b.hessian()).value);
  }
  return c;
}

bool terminates(const LazyCriticality& c, const SolverConfig& config) {
  if (!(c.chi1 <= config.eps1)) return false;
  return config.criticality_order == 1 || *c.chi2 <= config.eps2;
}

}  // namespace

Trace solve(const ProblemSpec& problem, const Vector& x0, const SolverConfig& config) {
  config.validate();
  if (problem.max_order < config.p) {
    throw UnsupportedOrder("problem '" + problem.name + "' has derivatives up to order " +
                           std::to_string(problem.max_order) + ", p = " +
                           std::to_string(config.p));
  }
  const int p = config.p;
  const bool verified = config.record_trial_criticality;

  Trace trace;
  trace.x0 = x0;

  DerivativeBundle bundle = evaluate_bundle(problem, x0, p);
  trace.f_evaluations = 1;
  trace.derivative_evaluations = 1;
  trace.f0 = bundle.f;

  SubsolverOptions inner;
  inner.theta = config.theta;
  inner.criticality_order = config.criticality_order;
  inner.eps1 = config.eps1;
  inner.max_inner_iterations = config.max_inner_iterations;
  inner.initial_radius = config.inner_initial_radius;

  double sigma = config.sigma0;
  LazyCriticality crit = measure(bundle, config, false);
  bool test_termination = true;
  for (int k = 0;; ++k) {
    if (test_termination && terminates(crit, config)) {
      trace.status = Status::kConverged;
      break;
    }
    if (k >= config.max_outer_iterations) {
      trace.status = Status::kMaxIterations;
      trace.message = "outer iteration cap reached";
      break;
    }

    const ModelState state{bundle, sigma, p};
    Step step;
    try {
      step = minimize_model(state, inner);
    } catch (const SubsolverFailure& e) {
      trace.status = Status::kSubsolverFailure;
      trace.message = e.what();
      break;
    }

    const Vector trial = bundle.x + step.s;
    IterationRecord rec;
    rec.k = k;
    rec.x = bundle.x;
    rec.sigma = sigma;
    rec.f_value = bundle.f;
    rec.taylor_decrease = bundle.f - taylor_value(state, step.s);
    rec.f_trial = evaluate_value(problem, trial);
    ++trace.f_evaluations;
    rec.step = std::move(step);

    const UpdateResult update =
        accept_and_update(rec.f_value, rec.f_trial, rec.taylor_decrease, sigma, config);
    rec.rho = update.rho;
    rec.successful = update.successful;
    rec.sigma_next = update.sigma_next;

    if (rec.successful) {
      bundle = evaluate_bundle(problem, trial, p);
      ++trace.derivative_evaluations;
      crit = measure(bundle, config, verified);
      rec.chi_f1_next = crit.chi1;
      rec.chi_f2_next = crit.chi2;
    } else if (verified) {
      const DerivativeBundle at_trial = evaluate_bundle(problem, trial, 2);
      ++trace.verification_evaluations;
      const LazyCriticality c = measure(at_trial, config, true);
      rec.chi_f1_next = c.chi1;
      rec.chi_f2_next = c.chi2;
    }
    test_termination = rec.successful;
    sigma = update.sigma_next;
    trace.records.push_back(std::move(rec));
  }

  trace.final_x = bundle.x;
  trace.final_f = bundle.f;
  trace.final_sigma = sigma;
  trace.final_criticality = objective_criticality(bundle);
  return trace;
}

}  // namespace arp
