#include "arp/bench.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "arp/diagnostics.hpp"
#include "arp/errors.hpp"

namespace arp {

namespace {

constexpr int kColumns = 16;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw InvalidArgument("CSV: bad number '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw InvalidArgument("CSV: bad integer '" + text + "'");
  }
  return v;
}

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += fmt(v[i]);
  }
  return out;
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::optional<double> theoretical_succ_bound(const ProblemSpec& problem,
                                             const SolverConfig& config, double f0) {
  const std::optional<double> lip = problem.constants.lipschitz_for(config.p);
  if (!lip || !problem.constants.f_low) return std::nullopt;
  return successful_iteration_bound(config, *lip, f0, *problem.constants.f_low);
}

RunRow make_run_row(const ProblemSpec& problem, const SolverConfig& config, const Trace& trace) {
  RunRow row;
  row.problem = problem.name;
  row.p = config.p;
  row.eps1 = config.eps1;
  row.eps2 = config.eps2;
  row.criticality_order = config.criticality_order;
  row.k_total = trace.total_iterations();
  row.k_succ = trace.successful_iterations();
  row.k_unsucc = trace.unsuccessful_iterations();
  row.f_evals = trace.f_evaluations;
  row.deriv_evals = trace.derivative_evaluations;
  row.final_f = trace.final_f;
  row.final_chi1 = trace.final_criticality.chi1;
  row.final_chi2 = trace.final_criticality.chi2;
  row.sigma_final = trace.final_sigma;
  row.theoretical_succ_bound = theoretical_succ_bound(problem, config, trace.f0);
  row.status = to_string(trace.status);
  return row;
}

std::string run_row_header() {
  return "problem,p,eps1,eps2,criticality_order,k_total,k_succ,k_unsucc,f_evals,deriv_evals,"
         "final_f,final_chi1,final_chi2,sigma_final,theoretical_succ_bound,status";
}

std::string format_run_row(const RunRow& r) {
  std::ostringstream out;
  out << r.problem << ',' << r.p << ',' << fmt(r.eps1) << ',' << fmt(r.eps2) << ','
      << r.criticality_order << ',' << r.k_total << ',' << r.k_succ << ',' << r.k_unsucc << ','
      << r.f_evals << ',' << r.deriv_evals << ',' << fmt(r.final_f) << ',' << fmt(r.final_chi1)
      << ',' << fmt(r.final_chi2) << ',' << fmt(r.sigma_final) << ','
      << opt(r.theoretical_succ_bound) << ',' << r.status;
  return out.str();
}

void write_run_rows(std::ostream& out, const std::vector<RunRow>& rows) {
  out << run_row_header() << '\n';
  for (const RunRow& r : rows) out << format_run_row(r) << '\n';
}

std::vector<RunRow> parse_run_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != run_row_header()) {
    throw InvalidArgument("CSV: missing or unexpected header");
  }
  std::vector<RunRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != kColumns) {
      throw InvalidArgument("CSV: expected " + std::to_string(kColumns) + " fields, got " +
                            std::to_string(f.size()));
    }
    RunRow r;
    r.problem = f[0];
    r.p = static_cast<int>(parse_long(f[1]));
    r.eps1 = parse_double(f[2]);
    r.eps2 = parse_double(f[3]);
    r.criticality_order = static_cast<int>(parse_long(f[4]));
    r.k_total = parse_long(f[5]);
    r.k_succ = parse_long(f[6]);
    r.k_unsucc = parse_long(f[7]);
    r.f_evals = parse_long(f[8]);
    r.deriv_evals = parse_long(f[9]);
    r.final_f = parse_double(f[10]);
    r.final_chi1 = parse_double(f[11]);
    r.final_chi2 = parse_double(f[12]);
    r.sigma_final = parse_double(f[13]);
    if (!f[14].empty()) r.theoretical_succ_bound = parse_double(f[14]);
    r.status = f[15];
    status_from_string(r.status);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  out << "k,x,sigma,s,step_norm,model_value,model_decrease,chi_m1,chi_m2,inner_iterations,"
         "taylor_decrease,f_value,f_trial,rho,successful,sigma_next,chi_f1_next,chi_f2_next\n";
  for (const IterationRecord& r : trace.records) {
    out << r.k << ',' << join(r.x) << ',' << fmt(r.sigma) << ',' << join(r.step.s) << ','
        << fmt(r.step.s.norm()) << ',' << fmt(r.step.model_value) << ','
        << fmt(r.step.model_decrease) << ',' << fmt(r.step.chi_m1) << ',' << fmt(r.step.chi_m2)
        << ',' << r.step.inner_iterations << ',' << fmt(r.taylor_decrease) << ','
        << fmt(r.f_value) << ',' << fmt(r.f_trial) << ',' << fmt(r.rho) << ','
        << (r.successful ? 1 : 0) << ',' << fmt(r.sigma_next) << ',' << opt(r.chi_f1_next)
        << ',' << opt(r.chi_f2_next) << '\n';
  }
  return out.str();
}

void SweepSpec::validate() const {
  if (problems.empty() || p_values.empty() || eps1_grid.empty() || eps2_grid.empty()) {
    throw InvalidArgument("sweep: problems, p values and both grids must be non-empty");
  }
  for (const std::string& name : problems) {
    if (!find_problem(name)) throw InvalidArgument("sweep: unknown problem '" + name + "'");
  }
  for (const auto* grid : {&eps1_grid, &eps2_grid}) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      if (!((*grid)[i] > 0.0)) throw InvalidArgument("sweep: tolerances must be positive");
      if (i > 0 && !((*grid)[i] < (*grid)[i - 1])) {
        throw InvalidArgument("sweep: tolerance grids must be strictly descending");
      }
    }
  }
  if (repetitions < 1) throw InvalidArgument("sweep: repetitions must be >= 1");
  if (!(perturbation >= 0.0)) throw InvalidArgument("sweep: perturbation must be >= 0");
}

Vector sweep_start(const ProblemSpec& problem, int rep, std::uint64_t seed, double perturbation) {
  Vector x0 = problem.default_x0;
  if (rep == 0) return x0;
  std::seed_seq seq{seed, static_cast<std::uint64_t>(rep),
                    static_cast<std::uint64_t>(std::hash<std::string>{}(problem.name))};
  std::mt19937_64 rng(seq);
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x0[i] += perturbation * (2.0 * u - 1.0);
  }
  return x0;
}

std::vector<RunRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<RunRow> rows;
  for (const std::string& name : spec.problems) {
    const ProblemSpec problem = *find_problem(name);
    for (int p : spec.p_values) {
      for (double eps1 : spec.eps1_grid) {
        for (double eps2 : spec.eps2_grid) {
          for (int rep = 0; rep < spec.repetitions; ++rep) {
            SolverConfig config = spec.base;
            config.p = p;
            config.eps1 = eps1;
            config.eps2 = eps2;
            const Vector x0 = sweep_start(problem, rep, spec.seed, spec.perturbation);
            rows.push_back(make_run_row(problem, config, solve(problem, x0, config)));
          }
        }
      }
    }
  }
  return rows;
}

SlopeFit fit_complexity_slope(const std::vector<RunRow>& rows, Axis axis) {
  if (rows.size() < 4) throw InvalidArgument("fit: need at least 4 rows");
  const bool on_eps1 = axis == Axis::kEps1;
  const double fixed = on_eps1 ? rows.front().eps2 : rows.front().eps1;
  const int n = static_cast<int>(rows.size());
  Vector xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    const RunRow& r = rows[i];
    if ((on_eps1 ? r.eps2 : r.eps1) != fixed) {
      throw InvalidArgument("fit: rows vary along both tolerance axes");
    }
    if (r.k_succ <= 0) throw InvalidArgument("fit: k_succ must be positive");
    xs[i] = std::log(1.0 / (on_eps1 ? r.eps1 : r.eps2));
    ys[i] = std::log(static_cast<double>(r.k_succ));
  }

  SlopeFit fit;
  fit.points = n;
  const double mx = xs.mean();
  const double my = ys.mean();
  const Vector dx = xs.array() - mx;
  const Vector dy = ys.array() - my;
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  if (sxx == 0.0) throw InvalidArgument("fit: all rows share the same tolerance");
  if (syy == 0.0) {
    fit.degenerate = true;
    fit.slope = 0.0;
    fit.intercept = my;
    fit.r2 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  fit.slope = dx.dot(dy) / sxx;
  fit.intercept = my - fit.slope * mx;
  const Vector resid = dy - fit.slope * dx;
  fit.r2 = 1.0 - resid.squaredNorm() / syy;
  return fit;
}

SlopeFit fit_complexity_slope(const std::string& csv_path, Axis axis) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidArgument("fit: cannot open '" + csv_path + "'");
  return fit_complexity_slope(parse_run_rows(in), axis);
}

}  // namespace arp
