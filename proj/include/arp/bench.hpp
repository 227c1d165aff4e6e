#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arp/driver.hpp"

namespace arp {

/// One solver run, as written to CSV.
struct RunRow {
  std::string problem;
  int p = 2;
  double eps1 = 0.0;
  double eps2 = 0.0;
  int criticality_order = 2;
  long k_total = 0;
  long k_succ = 0;
  long k_unsucc = 0;
  long f_evals = 0;
  long deriv_evals = 0;
  double final_f = 0.0;
  double final_chi1 = 0.0;
  double final_chi2 = 0.0;
  double sigma_final = 0.0;
  std::optional<double> theoretical_succ_bound;
  std::string status;

  bool operator==(const RunRow&) const = default;
};

RunRow make_run_row(const ProblemSpec& problem, const SolverConfig& config, const Trace& trace);

/// Successful-iteration bound when L (for config.p) and f_low are known.
std::optional<double> theoretical_succ_bound(const ProblemSpec& problem,
                                             const SolverConfig& config, double f0);

std::string run_row_header();
std::string format_run_row(const RunRow& row);
void write_run_rows(std::ostream& out, const std::vector<RunRow>& rows);
/// Parses CSV written by write_run_rows; throws InvalidArgument on malformed input.
std::vector<RunRow> parse_run_rows(std::istream& in);

/// One line per iteration record, header included.
std::string trace_to_csv(const Trace& trace);

struct SweepSpec {
  std::vector<std::string> problems;
  std::vector<int> p_values;
  std::vector<double> eps1_grid;
  std::vector<double> eps2_grid;
  /// Runs per grid point; repetition 0 starts at the default x0, later ones
  /// at a seeded uniform perturbation of it.
  int repetitions = 1;
  std::uint64_t seed = 0;
  double perturbation = 0.1;
  /// Settings other than p, eps1 and eps2.
  SolverConfig base;

  /// Throws InvalidArgument on empty lists, unknown problems, or grids that
  /// are not positive and strictly descending.
  void validate() const;
};

/// Starting point for repetition `rep` of `problem`.
Vector sweep_start(const ProblemSpec& problem, int rep, std::uint64_t seed, double perturbation);

/// One row per (problem, p, eps1, eps2, repetition), in that nesting order.
/// A failed run is recorded with its status; the sweep continues.
std::vector<RunRow> run_sweep(const SweepSpec& spec);

enum class Axis { kEps1, kEps2 };

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// All counts equal: slope and intercept are reported with r2 = NaN.
  bool degenerate = false;
  int points = 0;
};

/// Least-squares fit of log(k_succ) against log(1/eps) along `axis`.
/// Needs at least 4 rows with positive k_succ and the other tolerance held
/// fixed.
SlopeFit fit_complexity_slope(const std::vector<RunRow>& rows, Axis axis);
SlopeFit fit_complexity_slope(const std::string& csv_path, Axis axis);

}  // namespace arp
