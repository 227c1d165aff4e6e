#include "arp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "arp/errors.hpp"

namespace arp {

namespace {

double spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double regularizer(double sigma, int p, double step_norm) {
  return sigma / (p + 1) * std::pow(step_norm, p + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

// Equality replay: |recorded - recomputed| against a relative tolerance.
Check replay(std::string name, int k, double recorded, double recomputed, double tolerance,
             double scale) {
  return make_check(std::move(name), k, std::abs(recorded - recomputed), 0.0, tolerance,
                    std::max({scale, std::abs(recorded), std::abs(recomputed)}));
}

}  // namespace

Check make_check(std::string name, int k, double lhs, double rhs, double tolerance,
                 std::optional<double> scale) {
  Check c;
  c.name = std::move(name);
  c.k = k;
  c.lhs = lhs;
  c.rhs = rhs;
  c.tolerance = tolerance;
  c.scale = scale.value_or(std::max(std::abs(lhs), std::abs(rhs)));
  c.pass = lhs <= rhs + tolerance * c.scale;
  return c;
}

Check make_strict_check(std::string name, int k, double lhs, double rhs) {
  Check c;
  c.name = std::move(name);
  c.k = k;
  c.lhs = lhs;
  c.rhs = rhs;
  c.strict = true;
  c.pass = lhs < rhs;
  return c;
}

int InvariantReport::failures() const {
  int n = 0;
  for (const Check& c : per_iteration) n += c.pass ? 0 : 1;
  for (const Check& c : aggregate) n += c.pass ? 0 : 1;
  return n;
}

void InvariantReport::merge(const InvariantReport& other) {
  per_iteration.insert(per_iteration.end(), other.per_iteration.begin(),
                       other.per_iteration.end());
  aggregate.insert(aggregate.end(), other.aggregate.begin(), other.aggregate.end());
  if (!sigma_max) sigma_max = other.sigma_max;
  if (!kappa1) kappa1 = other.kappa1;
  if (!kappa2) kappa2 = other.kappa2;
  if (!kappa_s) kappa_s = other.kappa_s;
  if (!successful_bound) successful_bound = other.successful_bound;
  if (!total_bound) total_bound = other.total_bound;
  requires_L = requires_L || other.requires_L;
}

std::vector<Check> InvariantReport::named(const std::string& name) const {
  std::vector<Check> out;
  for (const Check& c : per_iteration) {
    if (c.name == name) out.push_back(c);
  }
  for (const Check& c : aggregate) {
    if (c.name == name) out.push_back(c);
  }
  return out;
}

double sigma_max(const SolverConfig& config, double lipschitz) {
  const int p = config.p;
  return std::max(config.sigma0,
                  config.gamma3 * lipschitz * (p + 1) / (p * (1.0 - config.eta2)));
}

ComplexityConstants complexity_constants(const SolverConfig& config, double lipschitz) {
  const int p = config.p;
  const double L = lipschitz;
  ComplexityConstants c;
  c.sigma_max = sigma_max(config, L);
  const double base = config.eta1 * config.sigma_min / (p + 1);
  const double first = L + config.theta + c.sigma_max;
  const double second = (p - 1) * L + config.theta + p * c.sigma_max;
  const double e1 = (p + 1.0) / p;
  const double e2 = (p + 1.0) / (p - 1.0);
  c.kappa1 = base * std::pow(1.0 / first, e1);
  c.kappa2 = base * std::pow(1.0 / second, e2);
  const double worst = config.criticality_order == 1
                           ? std::pow(first, e1)
                           : std::max(std::pow(first, e1), std::pow(second, e2));
  c.kappa_s = (p + 1) / (config.eta1 * config.sigma_min) * worst;
  return c;
}

double iteration_count_bound(int successes, const SolverConfig& config, double sigma_max) {
  const double lg2 = std::log(config.gamma2);
  return successes * (1.0 + std::abs(std::log(config.gamma1)) / lg2) +
         std::log(sigma_max / config.sigma0) / lg2;
}

namespace {

double eps_factor(const SolverConfig& config) {
  const int p = config.p;
  const double first = std::pow(config.eps1, -(p + 1.0) / p);
  if (config.criticality_order == 1) return first;
  return std::max(first, std::pow(config.eps2, -(p + 1.0) / (p - 1.0)));
}

}  // namespace

double successful_iteration_bound(const SolverConfig& config, double lipschitz, double f0,
                                  double f_low) {
  const ComplexityConstants c = complexity_constants(config, lipschitz);
  return std::floor(c.kappa_s * (f0 - f_low) * eps_factor(config)) + 1.0;
}

double total_iteration_bound(const SolverConfig& config, double lipschitz, double f0,
                             double f_low) {
  const ComplexityConstants c = complexity_constants(config, lipschitz);
  const double succ = std::floor(c.kappa_s * (f0 - f_low) * eps_factor(config));
  const double lg2 = std::log(config.gamma2);
  return succ * (1.0 + std::abs(std::log(config.gamma1)) / lg2) +
         std::log(c.sigma_max / config.sigma0) / lg2 + 1.0;
}

std::vector<std::pair<Vector, Vector>> sample_in_box(const ProblemSpec& problem, int count,
                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double lo = problem.box.lower;
  const double width = problem.box.upper - problem.box.lower;
  std::vector<std::pair<Vector, Vector>> out;
  for (int i = 0; i < count; ++i) {
    Vector x(problem.dim), y(problem.dim);
    for (int j = 0; j < problem.dim; ++j) x[j] = lo + width * uniform();
    for (int j = 0; j < problem.dim; ++j) y[j] = lo + width * uniform();
    // x + t (y - x) stays in the box for t in [0, 1].
    const double t = uniform();
    out.emplace_back(x, t * (y - x));
  }
  return out;
}

InvariantReport check_taylor_residuals(const ProblemSpec& problem,
                                       const std::vector<std::pair<Vector, Vector>>& samples,
                                       int p) {
  const std::optional<double> lip = problem.constants.lipschitz_for(p);
  if (!lip) {
    throw UnsupportedCheck("no Lipschitz constant for problem '" + problem.name + "' at p = " +
                           std::to_string(p));
  }
  const double L = *lip;
  InvariantReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [x, s] = samples[i];
    const int k = static_cast<int>(i);
    const ModelState state = make_model_state(evaluate_bundle(problem, x, p), 0.0, p);
    const DerivativeBundle shifted = evaluate_bundle(problem, x + s, 2);
    const ModelEval taylor = taylor_eval(state, s);
    const double r = s.norm();

    const double f_scale = std::abs(state.bundle.f) + std::abs(shifted.f) +
                           state.bundle.gradient().norm() * r + std::abs(taylor.value);
    report.per_iteration.push_back(make_check("resf", k, shifted.f,
                                              taylor.value + L / p * std::pow(r, p + 1),
                                              kRelTol, f_scale));

    const Vector g_shifted = shifted.gradient();
    report.per_iteration.push_back(make_check("resg", k, (g_shifted - taylor.gradient).norm(),
                                              L * std::pow(r, p), kRelTol,
                                              g_shifted.norm() + taylor.gradient.norm()));

    const Matrix h_shifted = shifted.hessian();
    report.per_iteration.push_back(make_check(
        "H-Lip", k, spectral_norm(h_shifted - taylor.hessian), (p - 1) * L * std::pow(r, p - 1),
        kEigenRelTol, spectral_norm(h_shifted) + spectral_norm(taylor.hessian)));
  }
  return report;
}

InvariantReport check_iteration_invariants(const Trace& trace, const ProblemSpec& problem,
                                           const SolverConfig& config) {
  InvariantReport report;
  const int p = config.p;
  const std::optional<double> lip = problem.constants.lipschitz_for(p);
  if (!lip) report.requires_L = true;

  std::optional<DerivativeBundle> bundle;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& rec = trace.records[i];
    const int k = rec.k;
    auto add = [&](Check c) { report.per_iteration.push_back(std::move(c)); };

    if (!bundle || bundle->x != rec.x) bundle = evaluate_bundle(problem, rec.x, p);
    const ModelState state{*bundle, rec.sigma, p};
    const Vector& s = rec.step.s;
    const double r = s.norm();
    const double fx = bundle->f;
    const Vector trial = rec.x + s;

    // Replays against fresh evaluations.
    const double f_trial = evaluate_value(problem, trial);
    const double tdec = fx - taylor_value(state, s);
    const ModelEval m = model_eval(state, s);
    const CriticalityPair mc = criticality(m.gradient, m.hessian);
    // recomputation runs the same code, so scale by the compared values alone
    const double fscale = 0.0;
    add(replay("replay-f", k, rec.f_value, fx, kRelTol, fscale));
    add(replay("replay-f-trial", k, rec.f_trial, f_trial, kRelTol, fscale));
    add(replay("replay-taylor-decrease", k, rec.taylor_decrease, tdec, kRelTol, fscale));
    add(replay("replay-model-value", k, rec.step.model_value, m.value, kRelTol, fscale));
    add(replay("replay-model-decrease", k, rec.step.model_decrease, fx - m.value, kRelTol,
               fscale));
    add(replay("replay-chi-m1", k, rec.step.chi_m1, mc.chi1, kEigenRelTol,
               0.0));
    add(replay("replay-chi-m2", k, rec.step.chi_m2, mc.chi2, kEigenRelTol,
               0.0));
    const double rho = (fx - f_trial) / tdec;
    add(replay("replay-rho", k, rec.rho, rho, kRelTol, 0.0));
    if (rec.taylor_decrease > 0.0) {
      const UpdateResult upd = accept_and_update(rec.f_value, rec.f_trial, rec.taylor_decrease,
                                                 rec.sigma, config);
      add(replay("replay-sigma-update", k, rec.sigma_next, upd.sigma_next, kRelTol, rec.sigma));
    } else {
      // no conforming iteration records a non-positive Taylor decrease
      add(make_check("replay-sigma-update", k, 1.0, 0.0, 0.0));
    }
    add(make_check("replay-success-flag", k, rec.successful == (rec.rho >= config.eta1) ? 0 : 1,
                   0.0, 0.0));

    const Vector expected_next = rec.successful ? trial : rec.x;
    const bool last = i + 1 == trace.records.size();
    const Vector& actual_next = last ? trace.final_x : trace.records[i + 1].x;
    const double actual_sigma = last ? trace.final_sigma : trace.records[i + 1].sigma;
    const double next_gap = actual_next.size() == expected_next.size()
                                ? (actual_next - expected_next).norm()
                                : std::numeric_limits<double>::infinity();
    add(make_check("replay-next-x", k, next_gap, 0.0, kRelTol,
                   std::max(1.0, expected_next.norm())));
    add(replay("replay-next-sigma", k, actual_sigma, rec.sigma_next, kRelTol, rec.sigma_next));

    if (rec.chi_f1_next || rec.chi_f2_next) {
      const CriticalityPair next = objective_criticality(evaluate_bundle(problem, trial, 2));
      if (rec.chi_f1_next) {
        add(replay("replay-chi-f1-next", k, *rec.chi_f1_next, next.chi1, kRelTol,
                   0.0));
      }
      if (rec.chi_f2_next) {
        add(replay("replay-chi-f2-next", k, *rec.chi_f2_next, next.chi2, kEigenRelTol,
                   0.0));
      }
    }

    // Acceptance conditions of the step.
    add(make_strict_check("descent2", k, m.value, fx));
    add(make_check("mterm-1", k, rec.step.chi_m1, config.theta * std::pow(r, p), kRelTol));
    if (config.criticality_order == 2) {
      add(make_check("mterm-2", k, rec.step.chi_m2, config.theta * std::pow(r, p - 1),
                     kRelTol));
    }
    add(make_strict_check("nonzero-step", k, 0.0, r));
    add(make_check("sigma-floor", k, config.sigma_min, rec.sigma, 0.0));

    // Taylor decrease dominates the regularization term.
    add(make_check("Dphi", k, regularizer(rec.sigma, p, r), tdec, kRelTol,
                   std::max({std::abs(fx), std::abs(tdec), regularizer(rec.sigma, p, r)})));

    if (rec.successful) {
      add(make_check("fdec", k, regularizer(config.eta1 * config.sigma_min, p, r),
                     fx - f_trial, kRelTol, std::max(std::abs(fx), std::abs(fx - f_trial))));
      add(make_strict_check("accepted-f-decrease", k, f_trial, fx));
    } else {
      add(make_check("unsuccessful-sigma-growth", k, config.gamma2 * rec.sigma, rec.sigma_next,
                     kRelTol));
    }

    if (lip) {
      const double L = *lip;
      if (rec.chi_f1_next) {
        add(make_check("longs-g", k,
                       std::pow(*rec.chi_f1_next / (L + config.theta + rec.sigma), 1.0 / p), r,
                       kRelTol));
      }
      if (rec.chi_f2_next && config.criticality_order == 2) {
        add(make_check(
            "longs-H", k,
            std::pow(*rec.chi_f2_next / ((p - 1) * L + config.theta + p * rec.sigma),
                     1.0 / (p - 1)),
            r, kEigenRelTol));
      }
    }
  }
  return report;
}

InvariantReport check_global_bounds(const Trace& trace, const ProblemSpec& problem,
                                    const SolverConfig& config) {
  InvariantReport report;
  auto add = [&](Check c) { report.aggregate.push_back(std::move(c)); };
  const int p = config.p;
  const int total = trace.total_iterations();
  const int succ = trace.successful_iterations();

  add(make_check("eval-count-f", -1, static_cast<double>(trace.f_evaluations), 1.0 + total,
                 0.0));
  add(make_check("eval-count-f-min", -1, 1.0 + total, static_cast<double>(trace.f_evaluations),
                 0.0));
  add(make_check("eval-count-deriv", -1, static_cast<double>(trace.derivative_evaluations),
                 1.0 + succ, 0.0));
  add(make_check("eval-count-deriv-min", -1, 1.0 + succ,
                 static_cast<double>(trace.derivative_evaluations), 0.0));

  if (trace.status == Status::kConverged) {
    add(make_check("f-term-1", -1, trace.final_criticality.chi1, config.eps1, 0.0));
    if (config.criticality_order == 2) {
      add(make_check("f-term-2", -1, trace.final_criticality.chi2, config.eps2, 0.0));
    }
  }

  const std::optional<double> lip = problem.constants.lipschitz_for(p);
  const std::optional<double> f_low = problem.constants.f_low;
  if (!lip || !f_low) report.requires_L = true;
  if (!lip) return report;

  const ComplexityConstants cc = complexity_constants(config, *lip);
  report.sigma_max = cc.sigma_max;
  report.kappa1 = cc.kappa1;
  report.kappa2 = cc.kappa2;
  report.kappa_s = cc.kappa_s;

  int successes = 0;
  for (const IterationRecord& rec : trace.records) {
    add(make_check("sigmaupper", rec.k, rec.sigma, cc.sigma_max, kRelTol));
    successes += rec.successful ? 1 : 0;
    add(make_check("unsucc-neg", rec.k, rec.k + 1.0,
                   iteration_count_bound(successes, config, cc.sigma_max), kRelTol));
  }
  add(make_check("sigmaupper", total, trace.final_sigma, cc.sigma_max, kRelTol));

  // Decrease guaranteed by whichever optimality condition fails at x_{k+1}.
  const double d1 = cc.kappa1 * std::pow(config.eps1, (p + 1.0) / p);
  const double d2 = cc.kappa2 * std::pow(config.eps2, (p + 1.0) / (p - 1.0));
  for (const IterationRecord& rec : trace.records) {
    if (!rec.successful) continue;
    double guaranteed = -1.0;
    if (rec.chi_f1_next && *rec.chi_f1_next > config.eps1) guaranteed = d1;
    if (config.criticality_order == 2 && rec.chi_f2_next && *rec.chi_f2_next > config.eps2) {
      guaranteed = std::max(guaranteed, d2);
    }
    if (guaranteed < 0.0) continue;
    add(make_check("fail-opt-decrease", rec.k, guaranteed, rec.f_value - rec.f_trial, kRelTol,
                   std::max(std::abs(rec.f_value), guaranteed)));
  }

  if (f_low) {
    report.successful_bound = successful_iteration_bound(config, *lip, trace.f0, *f_low);
    report.total_bound = total_iteration_bound(config, *lip, trace.f0, *f_low);
    add(make_check("succ-bound", -1, succ, *report.successful_bound, 0.0));
    add(make_check("total-bound", -1, total, *report.total_bound, 0.0));
  }
  return report;
}

InvariantReport verify_trace(const Trace& trace, const ProblemSpec& problem,
                             const SolverConfig& config) {
  InvariantReport report = check_iteration_invariants(trace, problem, config);
  report.merge(check_global_bounds(trace, problem, config));
  return report;
}

std::string format_report(const InvariantReport& report) {
  struct Summary {
    int count = 0;
    int failed = 0;
    double min_slack = INFINITY;
  };
  std::vector<std::string> order;
  std::map<std::string, Summary> by_name;
  auto visit = [&](const Check& c) {
    auto [it, inserted] = by_name.try_emplace(c.name);
    if (inserted) order.push_back(c.name);
    it->second.count += 1;
    it->second.failed += c.pass ? 0 : 1;
    it->second.min_slack = std::min(it->second.min_slack, c.slack());
  };
  for (const Check& c : report.per_iteration) visit(c);
  for (const Check& c : report.aggregate) visit(c);

  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-28s %8s %8s %14s\n", "check", "count", "failed",
                "min slack");
  out << line;
  for (const std::string& name : order) {
    const Summary& s = by_name[name];
    std::snprintf(line, sizeof line, "%-28s %8d %8d %14.6e\n", name.c_str(), s.count, s.failed,
                  s.min_slack);
    out << line;
  }
  auto bound = [&](const char* label, const std::optional<double>& v) {
    if (v) out << label << " = " << fmt(*v) << "\n";
  };
  bound("sigma_max", report.sigma_max);
  bound("kappa_1", report.kappa1);
  bound("kappa_2", report.kappa2);
  bound("kappa_s", report.kappa_s);
  bound("successful iteration bound", report.successful_bound);
  bound("total iteration bound", report.total_bound);
  if (report.requires_L) out << "note: some checks skipped (L or f_low unknown)\n";
  for (const auto* list : {&report.per_iteration, &report.aggregate}) {
    for (const Check& c : *list) {
      if (c.pass) continue;
      out << "FAILED " << c.name << " k=" << c.k << " lhs=" << fmt(c.lhs)
          << " rhs=" << fmt(c.rhs) << "\n";
    }
  }
  out << (report.all_passed() ? "all checks passed" : "some checks FAILED") << " ("
      << report.failures() << " failures)\n";
  return out.str();
}

std::string report_to_csv(const InvariantReport& report) {
  std::ostringstream out;
  out << "name,k,lhs,rhs,slack,pass\n";
  for (const auto* list : {&report.per_iteration, &report.aggregate}) {
    for (const Check& c : *list) {
      out << c.name << ',' << c.k << ',' << fmt(c.lhs) << ',' << fmt(c.rhs) << ','
          << fmt(c.slack()) << ',' << (c.pass ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace arp
