#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arp/driver.hpp"

namespace arp {

/// One inequality lhs <= rhs (or lhs < rhs when strict).
///
/// Non-strict checks pass when lhs <= rhs + tolerance * scale, where scale
/// is the magnitude of the quantities the two sides were computed from.
struct Check {
  std::string name;
  int k = -1;  // iteration index, or sample index, -1 for run-level checks
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  double scale = 0.0;
  bool strict = false;
  bool pass = false;

  double slack() const { return rhs - lhs; }
};

Check make_check(std::string name, int k, double lhs, double rhs, double tolerance,
                 std::optional<double> scale = std::nullopt);
Check make_strict_check(std::string name, int k, double lhs, double rhs);

struct InvariantReport {
  std::vector<Check> per_iteration;
  std::vector<Check> aggregate;
  std::optional<double> sigma_max;
  std::optional<double> kappa1;
  std::optional<double> kappa2;
  std::optional<double> kappa_s;
  std::optional<double> successful_bound;
  std::optional<double> total_bound;
  /// Some checks were skipped because L or f_low is unknown.
  bool requires_L = false;

  int failures() const;
  bool all_passed() const { return failures() == 0; }
  /// Appends the other report's checks; bounds are taken where unset.
  void merge(const InvariantReport& other);
  /// Checks whose name matches, in order.
  std::vector<Check> named(const std::string& name) const;
};

inline constexpr double kRelTol = 1e-10;
inline constexpr double kEigenRelTol = 1e-8;

/// max(sigma0, gamma3 L (p+1) / (p (1 - eta2))).
double sigma_max(const SolverConfig& config, double lipschitz);

struct ComplexityConstants {
  double sigma_max = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa_s = 0.0;
};

/// sigma_max, the per-success decrease constants for the first- and
/// second-order cases, and kappa_s. For criticality_order 1 kappa_s only
/// involves the first-order term.
ComplexityConstants complexity_constants(const SolverConfig& config, double lipschitz);

/// |S_k|(1 + |log gamma1| / log gamma2) + log(sigma_max / sigma0) / log gamma2,
/// the bound on k+1 after `successes` successful iterations.
double iteration_count_bound(int successes, const SolverConfig& config, double sigma_max);

/// floor(kappa_s (f0 - f_low) max(eps1^-(p+1)/p, eps2^-(p+1)/(p-1))) + 1.
/// Only the eps1 term enters for criticality_order 1.
double successful_iteration_bound(const SolverConfig& config, double lipschitz, double f0,
                                  double f_low);

/// Bound on the total number of iterations.
double total_iteration_bound(const SolverConfig& config, double lipschitz, double f0,
                             double f_low);

/// Pairs (x, s) with x and x + s inside the problem's box.
std::vector<std::pair<Vector, Vector>> sample_in_box(const ProblemSpec& problem, int count,
                                                     std::uint64_t seed);

/// Taylor residual bounds at each (x, s):
///   resf:  f(x+s) <= T_p(x,s) + L/p ||s||^(p+1)
///   resg:  ||grad f(x+s) - grad_s T_p(x,s)|| <= L ||s||^p
///   H-Lip: ||hess f(x+s) - hess_s T_p(x,s)||_2 <= (p-1) L ||s||^(p-1)
/// Throws UnsupportedCheck when L is unknown for this p.
InvariantReport check_taylor_residuals(const ProblemSpec& problem,
                                       const std::vector<std::pair<Vector, Vector>>& samples,
                                       int p);

/// Per-iteration checks over a trace: replay of every recorded quantity
/// against fresh evaluations at the recorded points, (descent2), (mterm),
/// the Taylor decrease lower bound, the guaranteed decrease on successful
/// iterations, and, when L and the trial-point criticality are available,
/// the step-length lower bounds in terms of chi_f1 and chi_f2 at x_k + s_k.
InvariantReport check_iteration_invariants(const Trace& trace, const ProblemSpec& problem,
                                           const SolverConfig& config);

/// Run-level checks: evaluation accounting, sigma_k <= sigma_max, the
/// iteration count in terms of successes, the successful and total
/// iteration bounds, and the per-success decrease implied by the failing
/// optimality condition at the next iterate.
InvariantReport check_global_bounds(const Trace& trace, const ProblemSpec& problem,
                                    const SolverConfig& config);

/// check_iteration_invariants merged with check_global_bounds.
InvariantReport verify_trace(const Trace& trace, const ProblemSpec& problem,
                             const SolverConfig& config);

/// Human-readable table.
std::string format_report(const InvariantReport& report);

/// name,k,lhs,rhs,slack,pass with a header row.
std::string report_to_csv(const InvariantReport& report);

}  // namespace arp
