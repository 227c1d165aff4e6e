#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arp/subsolver.hpp"

namespace arp {

struct SolverConfig {
  int p = 2;
  double eps1 = 1e-6;
  double eps2 = 1e-6;
  double theta = 100.0;
  double eta1 = 0.1;
  double eta2 = 0.9;
  double gamma1 = 0.5;
  double gamma2 = 2.0;
  double gamma3 = 10.0;
  double sigma0 = 1.0;
  double sigma_min = 1e-8;
  int max_outer_iterations = 100000;
  /// 1: first-order points only; 2: first- and second-order points.
  int criticality_order = 2;
  int max_inner_iterations = 500;
  double inner_initial_radius = 1.0;
  /// Evaluate criticality at every trial point, including rejected ones.
  /// The extra evaluations are counted in Trace::verification_evaluations.
  bool record_trial_criticality = false;

  /// Throws InvalidArgument unless
  ///   theta > 0, 0 < sigma_min <= sigma0, 0 < eta1 <= eta2 < 1,
  ///   0 < gamma1 < 1 < gamma2 < gamma3, eps1, eps2 > 0, p >= 2.
  void validate() const;
};

enum class Status { kConverged, kMaxIterations, kSubsolverFailure };

std::string to_string(Status status);
Status status_from_string(const std::string& text);

struct IterationRecord {
  int k = 0;
  Vector x;
  double sigma = 0.0;
  Step step;
  double taylor_decrease = 0.0;  // T_p(x, 0) - T_p(x, s)
  double rho = 0.0;
  bool successful = false;
  double f_value = 0.0;  // f(x_k)
  double f_trial = 0.0;  // f(x_k + s_k)
  double sigma_next = 0.0;
  // Criticality at x_k + s_k, when it was evaluated.
  std::optional<double> chi_f1_next;
  std::optional<double> chi_f2_next;
};

struct Trace {
  std::vector<IterationRecord> records;
  long f_evaluations = 0;
  long derivative_evaluations = 0;
  long verification_evaluations = 0;
  Status status = Status::kMaxIterations;
  std::string message;
  Vector x0;
  double f0 = 0.0;
  Vector final_x;
  double final_f = 0.0;
  double final_sigma = 0.0;
  CriticalityPair final_criticality;

  int total_iterations() const { return static_cast<int>(records.size()); }
  int successful_iterations() const;
  int unsuccessful_iterations() const { return total_iterations() - successful_iterations(); }
};

struct UpdateResult {
  double rho = 0.0;
  bool successful = false;
  double sigma_next = 0.0;
};

/// Ratio of achieved to Taylor-predicted decrease and the regularization
/// update. sigma_next takes a fixed endpoint of each admissible interval:
///   rho >= eta2          -> max(sigma_min, gamma1 sigma)
///   eta1 <= rho < eta2   -> sigma
///   rho < eta1           -> gamma2 sigma
UpdateResult accept_and_update(double f_x, double f_trial, double taylor_decrease, double sigma,
                               const SolverConfig& config);

/// chi1 <= eps1, and chi2 <= eps2 unless only first-order points are sought.
bool termination_check(const CriticalityPair& pair, const SolverConfig& config);

/// Adaptive regularization with p-th order Taylor models, started at x0.
///
/// Derivatives are evaluated at x0 and after every successful iteration;
/// rejected trial points cost one function value. Subsolver failure and the
/// outer iteration cap end the run with a partial trace and the matching
/// status rather than an exception.
Trace solve(const ProblemSpec& problem, const Vector& x0, const SolverConfig& config);

}  // namespace arp
