#pragma once

#include <stdexcept>
#include <string>

#include "arp/model.hpp"

namespace arp {

/// Approximate model minimizer s_k with its acceptance data.
struct Step {
  Vector s;
  double model_value = 0.0;
  double model_decrease = 0.0;  // m(x, 0, sigma) - m(x, s, sigma)
  double chi_m1 = 0.0;
  double chi_m2 = 0.0;
  int inner_iterations = 0;
};

struct SubsolverOptions {
  double theta = 100.0;
  int criticality_order = 2;
  /// Outer first-order tolerance. The escape step follows -grad f when
  /// ||grad f|| > eps1 and the leftmost Hessian eigenvector otherwise.
  double eps1 = 1e-6;
  int max_inner_iterations = 500;
  double initial_radius = 1.0;
  int max_backtracks = 60;
};

/// The inner iteration cap was reached (or the trust region collapsed)
/// before the termination conditions held. Carries the best step found.
class SubsolverFailure : public std::runtime_error {
 public:
  SubsolverFailure(const std::string& what, Step best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const Step& best() const { return best_; }

 private:
  Step best_;
};

/// True when chi_m1 <= theta ||s||^p and, for criticality_order 2,
/// chi_m2 <= theta ||s||^(p-1).
bool model_termination_holds(double chi_m1, double chi_m2, double step_norm, double theta,
                             int p, int criticality_order);

/// First step away from s = 0 along -grad f or the leftmost eigenvector of
/// the Hessian, halved until the model value drops below f(x).
/// Throws InternalError when max_backtracks halvings do not produce descent.
Vector escape_origin_step(const ModelState& state, double eps1, int criticality_order,
                          int max_backtracks = 60);

/// Minimizer of the quadratic g^T d + d^T H d / 2 over ||d|| <= radius, with
/// H given by its eigen-decomposition (eigenvalues ascending, eigenvectors
/// in the columns of q).
Vector trust_region_step(const Vector& g, const Vector& eigenvalues, const Matrix& q,
                         double radius);

/// Approximately minimizes m(x, ., sigma).
///
/// Starts from escape_origin_step and runs a trust-region Newton iteration
/// on the model, returning at the first iterate where
/// model_termination_holds. Model values never increase across inner
/// iterations, so the returned step always has model_decrease > 0. Only the
/// stored derivatives are used; the objective is never evaluated.
Step minimize_model(const ModelState& state, const SubsolverOptions& options);

}  // namespace arp
