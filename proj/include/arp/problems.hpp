#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arp/sym_tensor.hpp"

namespace arp {

/// f(x) and its derivative tensors of orders 1..order() at one point.
struct DerivativeBundle {
  Vector x;
  double f = 0.0;
  std::vector<SymTensor> derivs;  // derivs[j-1] has order j

  int order() const { return static_cast<int>(derivs.size()); }
  const SymTensor& derivative(int j) const { return derivs.at(j - 1); }
  Vector gradient() const { return derivative(1).to_vector(); }
  Matrix hessian() const { return derivative(2).to_matrix(); }
};

/// Analytic constants of a test problem.
///
/// Lipschitz constants use the convention
///   ||D^p f(x) - D^p f(y)||_[p] <= (p-1)! L ||x - y||,
/// so L depends on the model order p and is stored per p. Constants of
/// polynomial problems hold only on the problem's sampling box.
struct ProblemConstants {
  std::map<int, double> lipschitz;
  std::optional<double> f_low;
  std::vector<Vector> known_minimizers;
  std::vector<Vector> known_saddles;

  std::optional<double> lipschitz_for(int p) const {
    auto it = lipschitz.find(p);
    if (it == lipschitz.end()) return std::nullopt;
    return it->second;
  }
};

/// Axis-aligned box [lower, upper]^n on which sampled checks are run.
struct Box {
  double lower = -5.0;
  double upper = 5.0;
};

/// An objective with analytic derivatives up to `max_order`.
struct ProblemSpec {
  /// Returns f and derivatives of orders 1..order at x (order 0: f only).
  using Evaluator = std::function<DerivativeBundle(const Vector& x, int order)>;

  std::string name;
  int dim = 0;
  int max_order = 0;
  Evaluator evaluator;
  ProblemConstants constants;
  Vector default_x0;
  Box box;
};

/// Validated call into problem.evaluator.
DerivativeBundle evaluate_bundle(const ProblemSpec& problem, const Vector& x, int order);

/// f(x) alone.
double evaluate_value(const ProblemSpec& problem, const Vector& x);

/// Largest relative discrepancy between the analytic derivatives of orders
/// 1..order at x and central differences (step h) of the next lower order.
/// Discrepancies of order j are scaled by max(1, largest |entry| of D^j f(x)).
double fd_validate(const ProblemSpec& problem, const Vector& x, int order, double h);

// Problem factories. All are analytic to order 4.
ProblemSpec make_quadratic(const Matrix& a, std::string name = "quadratic");
ProblemSpec make_separable_quartic(int n);
ProblemSpec make_rosenbrock();
ProblemSpec make_chained_rosenbrock(int n);
ProblemSpec make_strict_saddle();
ProblemSpec make_trig(int n);

/// The built-in test suite: quadratic, quadratic_aniso, quartic, rosenbrock,
/// rosenbrock_chained, saddle, trig.
std::vector<ProblemSpec> builtin_suite();

/// Looks up a built-in problem; std::nullopt for unknown names.
std::optional<ProblemSpec> find_problem(const std::string& name);

}  // namespace arp
