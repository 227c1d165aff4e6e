#include "arp/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "arp/errors.hpp"

namespace arp {

namespace {

constexpr double kAcceptRatio = 0.1;
constexpr double kExpandRatio = 0.75;

}  // namespace

bool model_termination_holds(double chi_m1, double chi_m2, double step_norm, double theta,
                             int p, int criticality_order) {
  if (!(chi_m1 <= theta * std::pow(step_norm, p))) return false;
  if (criticality_order == 2 && !(chi_m2 <= theta * std::pow(step_norm, p - 1))) return false;
  return true;
}

Vector escape_origin_step(const ModelState& state, double eps1, int criticality_order,
                          int max_backtracks) {
  const Vector g = state.bundle.gradient();
  const double gnorm = g.norm();
  Vector d;
  if (gnorm > eps1 || criticality_order == 1) {
    if (gnorm == 0.0) {
      throw InvalidArgument("escape_origin_step: zero gradient and no curvature direction");
    }
    d = -g / gnorm;
  } else {
    d = leftmost_eigenpair(state.bundle.hessian()).vector;
    if (g.dot(d) > 0.0) d = -d;
  }

  const double f0 = state.bundle.f;
  double alpha = 1.0;
  for (int j = 0; j <= max_backtracks; ++j) {
    Vector s = alpha * d;
    if (model_value(state, s) < f0) return s;
    alpha *= 0.5;
  }
  throw InternalError("escape_origin_step: no model decrease after " +
                      std::to_string(max_backtracks) + " backtracks");
}

Vector trust_region_step(const Vector& g, const Vector& eigenvalues, const Matrix& q,
                         double radius) {
  const Eigen::Index n = g.size();
  const Vector gh = q.transpose() * g;
  const double lmin = eigenvalues[0];

  auto step_at = [&](double mu) {
    Vector c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = -gh[i] / (eigenvalues[i] + mu);
    return c;
  };

  if (lmin > 0.0) {
    Vector c = step_at(0.0);
    if (c.norm() <= radius) return q * c;
  }

  // Hard case: g has no component in the leftmost eigenspace and the shifted
  // step stays inside the region, so the boundary is reached along that
  // eigenspace.
  const double lscale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  const double gscale = g.norm();
  if (lmin <= 0.0) {
    double g_left = 0.0;
    Vector rest = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (eigenvalues[i] - lmin <= 1e-12 * lscale) {
        g_left = std::max(g_left, std::abs(gh[i]));
      } else {
        rest[i] = -gh[i] / (eigenvalues[i] - lmin);
      }
    }
    if (g_left <= 1e-12 * gscale && rest.norm() <= radius) {
      const double tau = std::sqrt(std::max(0.0, radius * radius - rest.squaredNorm()));
      rest[0] += (gh[0] > 0.0) ? -tau : tau;
      return q * rest;
    }
  }

  // Boundary solution: ||c(mu)|| = radius with mu > max(0, -lmin). The norm
  // is decreasing in mu; Newton on 1/||c|| - 1/radius with bisection.
  double lo = std::max(0.0, -lmin);
  double hi = std::max(lo, gscale / radius - lmin);
  double mu = hi;
  for (int it = 0; it < 200; ++it) {
    const Vector c = step_at(mu);
    const double norm = c.norm();
    if (std::isfinite(norm) && std::abs(norm - radius) <= 1e-12 * radius) return q * c;
    if (!std::isfinite(norm) || norm > radius) {
      lo = mu;
    } else {
      hi = mu;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(norm) && norm > 0.0) {
      double dnorm = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double den = eigenvalues[i] + mu;
        dnorm += gh[i] * gh[i] / (den * den * den);
      }
      const double phi = 1.0 / norm - 1.0 / radius;
      const double dphi = dnorm / (norm * norm * norm);
      if (dphi > 0.0) next = mu - phi / dphi;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == mu) break;
    mu = next;
  }
  Vector c = step_at(hi);
  if (!c.allFinite()) c = step_at(mu);
  return q * c;
}

Step minimize_model(const ModelState& state, const SubsolverOptions& options) {
  if (!(options.theta > 0.0)) throw InvalidArgument("minimize_model: theta must be positive");
  if (options.criticality_order != 1 && options.criticality_order != 2) {
    throw InvalidArgument("minimize_model: criticality_order must be 1 or 2");
  }
  const int p = state.p;
  const double f0 = state.bundle.f;

  Vector s = escape_origin_step(state, options.eps1, options.criticality_order,
                                options.max_backtracks);
  ModelEval cur = model_eval(state, s);
  double radius = options.initial_radius;

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  bool moved = true;
  Step best;
  for (int iter = 0;; ++iter) {
    if (moved) {
      es.compute(cur.hessian);
      best = Step{s, cur.value, f0 - cur.value, cur.gradient.norm(),
                  std::max(0.0, -es.eigenvalues()[0]), iter};
      if (model_termination_holds(best.chi_m1, best.chi_m2, s.norm(), options.theta, p,
                                  options.criticality_order)) {
        return best;
      }
      moved = false;
    }
    best.inner_iterations = iter;
    if (iter >= options.max_inner_iterations) {
      throw SubsolverFailure("minimize_model: inner iteration cap reached", best);
    }

    const Vector d = trust_region_step(cur.gradient, es.eigenvalues(), es.eigenvectors(), radius);
    const double predicted = -(cur.gradient.dot(d) + 0.5 * d.dot(cur.hessian * d));
    const double dnorm = d.norm();
    if (!(predicted > 0.0) || dnorm == 0.0) {
      throw SubsolverFailure("minimize_model: no predicted model decrease", best);
    }
    const Vector trial = s + d;
    const double trial_value = model_value(state, trial);
    const double actual = cur.value - trial_value;
    const double ratio = actual / predicted;

    bool accept = ratio >= kAcceptRatio && actual > 0.0;
    ModelEval trial_eval;
    if (!accept && predicted <= 1e-14 * (1.0 + std::abs(cur.value)) && actual >= 0.0) {
      // Below rounding level the ratio is noise; accept if the gradient shrinks.
      trial_eval = model_eval(state, trial);
      accept = trial_eval.gradient.norm() < cur.gradient.norm();
    }

    if (accept) {
      s = trial;
      cur = trial_eval.gradient.size() ? std::move(trial_eval) : model_eval(state, s);
      moved = true;
      if (ratio > kExpandRatio && dnorm >= 0.99 * radius) radius *= 2.0;
    } else {
      radius = 0.25 * dnorm;
      if (radius <= 1e-15 * (1.0 + s.norm())) {
        throw SubsolverFailure("minimize_model: trust region collapsed", best);
      }
    }
  }
}

}  // namespace arp
