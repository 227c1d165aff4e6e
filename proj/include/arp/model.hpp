#pragma once

#include "arp/problems.hpp"

namespace arp {

/// Everything needed to evaluate the regularized model
///   m(s) = T_p(x, s) + sigma/(p+1) ||s||^(p+1)
/// around the bundle's point x.
struct ModelState {
  DerivativeBundle bundle;
  double sigma = 1.0;
  int p = 2;
};

/// Checks sigma >= 0 (0 gives the bare Taylor model), p >= 1, and that the
/// bundle carries at least p derivative tensors.
ModelState make_model_state(DerivativeBundle bundle, double sigma, int p);

struct ModelEval {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

struct Eigenpair {
  double value = 0.0;
  Vector vector;
};

/// chi1 = ||g||, chi2 = max(0, -lambda_min(H)), with the leftmost eigenpair.
struct CriticalityPair {
  double chi1 = 0.0;
  double chi2 = 0.0;
  double leftmost_eigenvalue = 0.0;
  Vector leftmost_eigenvector;
};

/// T_p(x, s).
double taylor_value(const ModelState& state, const Vector& s);

/// Value, gradient and Hessian of T_p(x, .) at s (no regularization).
ModelEval taylor_eval(const ModelState& state, const Vector& s);

/// m(x, s, sigma) alone.
double model_value(const ModelState& state, const Vector& s);

/// Value, gradient and Hessian of m(x, ., sigma) at s. At s = 0 the
/// regularization contributes nothing to any of the three; for p = 2 this
/// drops the ||s||^-1 s s^T term, whose limit at the origin does not exist.
ModelEval model_eval(const ModelState& state, const Vector& s);

/// Smallest eigenvalue of a symmetric matrix and a unit eigenvector for it.
Eigenpair leftmost_eigenpair(const Matrix& h);

CriticalityPair criticality(const Vector& gradient, const Matrix& hessian);

/// Criticality of f at the bundle's point.
CriticalityPair objective_criticality(const DerivativeBundle& bundle);

/// Criticality of m(x, ., sigma) at s.
CriticalityPair model_criticality(const ModelState& state, const Vector& s);

}  // namespace arp
