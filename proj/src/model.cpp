#include "arp/model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "arp/errors.hpp"

namespace arp {

namespace {

void check_step(const ModelState& state, const Vector& s) {
  if (s.size() != state.bundle.x.size()) {
    throw InvalidArgument("model: step has dimension " + std::to_string(s.size()) +
                          ", model has dimension " + std::to_string(state.bundle.x.size()));
  }
}

// Adds sum_j 1/j! D^j f[s]^j (and, when requested, the gradient and Hessian
// of that sum) to `out`. Each tensor is contracted once down to a matrix.
void accumulate_taylor(const ModelState& state, const Vector& s, bool derivatives,
                       ModelEval& out) {
  const int n = static_cast<int>(s.size());
  out.value = state.bundle.f;
  if (derivatives) {
    out.gradient = Vector::Zero(n);
    out.hessian = Matrix::Zero(n, n);
  }
  double fact_j = 1.0;  // j!
  for (int j = 1; j <= state.p; ++j) {
    fact_j *= j;
    const SymTensor& t = state.bundle.derivative(j);
    if (j == 1) {
      const Vector g = t.to_vector();
      out.value += g.dot(s);
      if (derivatives) out.gradient += g;
      continue;
    }
    const Matrix m = contract_to_matrix(t, s);  // D^j f[s]^(j-2)
    const Vector v = m * s;                     // D^j f[s]^(j-1)
    out.value += s.dot(v) / fact_j;
    if (derivatives) {
      out.gradient += v * (j / fact_j);                // 1/(j-1)!
      out.hessian += m * (j * (j - 1) / fact_j);       // 1/(j-2)!
    }
  }
}

}  // namespace

ModelState make_model_state(DerivativeBundle bundle, double sigma, int p) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("model: sigma must be finite and non-negative");
  }
  if (p < 1) throw InvalidArgument("model: p must be >= 1");
  if (bundle.order() < p) {
    throw InvalidArgument("model: bundle has " + std::to_string(bundle.order()) +
                          " derivative tensors, p = " + std::to_string(p));
  }
  return ModelState{std::move(bundle), sigma, p};
}

double taylor_value(const ModelState& state, const Vector& s) {
  check_step(state, s);
  ModelEval e;
  accumulate_taylor(state, s, false, e);
  return e.value;
}

ModelEval taylor_eval(const ModelState& state, const Vector& s) {
  check_step(state, s);
  ModelEval e;
  accumulate_taylor(state, s, true, e);
  return e;
}

double model_value(const ModelState& state, const Vector& s) {
  const double r = s.norm();
  return taylor_value(state, s) + state.sigma / (state.p + 1) * std::pow(r, state.p + 1);
}

ModelEval model_eval(const ModelState& state, const Vector& s) {
  ModelEval e = taylor_eval(state, s);
  const double r = s.norm();
  if (r == 0.0) return e;
  const int p = state.p;
  const double sigma = state.sigma;
  e.value += sigma / (p + 1) * std::pow(r, p + 1);
  e.gradient += sigma * std::pow(r, p - 1) * s;
  e.hessian += sigma * ((p - 1) * std::pow(r, p - 3) * (s * s.transpose()) +
                        std::pow(r, p - 1) * Matrix::Identity(s.size(), s.size()));
  return e;
}

Eigenpair leftmost_eigenpair(const Matrix& h) {
  if (h.rows() != h.cols() || h.rows() < 1) {
    throw InvalidArgument("leftmost_eigenpair: matrix must be square and non-empty");
  }
  if (!h.allFinite()) throw InvalidArgument("leftmost_eigenpair: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw InternalError("leftmost_eigenpair: eigensolver did not converge");
  }
  return {es.eigenvalues()[0], es.eigenvectors().col(0).normalized()};
}

CriticalityPair criticality(const Vector& gradient, const Matrix& hessian) {
  const Eigenpair left = leftmost_eigenpair(hessian);
  return {gradient.norm(), std::max(0.0, -left.value), left.value, left.vector};
}

CriticalityPair objective_criticality(const DerivativeBundle& bundle) {
  if (bundle.order() < 2) {
    throw InvalidArgument("objective_criticality: bundle needs derivatives of order 2");
  }
  return criticality(bundle.gradient(), bundle.hessian());
}

CriticalityPair model_criticality(const ModelState& state, const Vector& s) {
  const ModelEval e = model_eval(state, s);
  return criticality(e.gradient, e.hessian);
}

}  // namespace arp
