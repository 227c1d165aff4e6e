#include <cmath>
#include <random>

#include "arp/errors.hpp"
#include "arp/model.hpp"
#include "doctest.h"

using arp::Matrix;
using arp::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

arp::ModelState quad_state(double sigma, int p) {
  const arp::ProblemSpec q = arp::make_quadratic(Matrix::Identity(2, 2));
  return arp::make_model_state(arp::evaluate_bundle(q, vec({1, 0}), p), sigma, p);
}

// det(a - lambda I) by partial-pivot elimination.
double char_poly(const Matrix& a, double lambda) {
  Matrix m = a - lambda * Matrix::Identity(a.rows(), a.cols());
  const int n = static_cast<int>(m.rows());
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      m.row(piv).swap(m.row(c));
      det = -det;
    }
    det *= m(c, c);
    for (int r = c + 1; r < n; ++r) m.row(r) -= (m(r, c) / m(c, c)) * m.row(c);
  }
  return det;
}

// Smallest root of the characteristic polynomial: scan from the Gershgorin
// lower bound for the first sign change, then bisect.
double smallest_root(const Matrix& a) {
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    const double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    lo = std::min(lo, a(i, i) - r);
    hi = std::max(hi, a(i, i) + r);
  }
  lo -= 1e-3;
  const int steps = 100000;
  double x0 = lo, f0 = char_poly(a, lo);
  for (int i = 1; i <= steps; ++i) {
    double x1 = lo + (hi + 1e-3 - lo) * i / steps;
    const double f1 = char_poly(a, x1);
    if ((f0 < 0) != (f1 < 0)) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (x0 + x1);
        if ((char_poly(a, mid) < 0) == (f0 < 0)) x0 = mid; else x1 = mid;
      }
      return 0.5 * (x0 + x1);
    }
    x0 = x1;
    f0 = f1;
  }
  return NAN;
}

// Fourth-order accurate second differences of m along coordinate pairs.
struct FiniteDifferences {
  Vector grad;
  Matrix hess;
};

FiniteDifferences model_fd(const arp::ModelState& st, const Vector& s, double h) {
  const int n = static_cast<int>(s.size());
  auto m = [&](const Vector& t) { return arp::model_value(st, t); };
  auto e = [&](int i) { return Vector(Vector::Unit(n, i)); };
  FiniteDifferences fd{Vector(n), Matrix(n, n)};
  for (int i = 0; i < n; ++i) {
    auto d1 = [&](double hh) { return (m(s + hh * e(i)) - m(s - hh * e(i))) / (2 * hh); };
    fd.grad[i] = (4 * d1(h / 2) - d1(h)) / 3;
    for (int j = 0; j < n; ++j) {
      auto d2 = [&](double hh) {
        const Vector a = hh * e(i), b = hh * e(j);
        return (m(s + a + b) - m(s + a - b) - m(s - a + b) + m(s - a - b)) / (4 * hh * hh);
      };
      fd.hess(i, j) = (4 * d2(h / 2) - d2(h)) / 3;
    }
  }
  return fd;
}

}  // namespace

TEST_CASE("taylor value: exactness and zero step") {
  const arp::ModelState st = quad_state(3.0, 2);
  CHECK(arp::taylor_value(st, vec({1, 0})) == 2.0);
  CHECK(arp::taylor_value(st, Vector::Zero(2)) == st.bundle.f);
  CHECK(arp::model_value(st, Vector::Zero(2)) == st.bundle.f);
}

TEST_CASE("taylor value: 1-D quartic, p = 3") {
  const arp::ProblemSpec p = arp::make_separable_quartic(1);
  const arp::ModelState st = arp::make_model_state(arp::evaluate_bundle(p, vec({1}), 3), 1.0, 3);
  const double t = arp::taylor_value(st, vec({1}));
  CHECK(t == 15.0);
  const double resid = arp::evaluate_value(p, vec({2})) - t;
  CHECK(resid == 1.0);
  CHECK(resid <= *p.constants.lipschitz_for(3) / 3.0);
}

TEST_CASE("model value with regularization") {
  CHECK(arp::model_value(quad_state(3.0, 2), vec({1, 0})) == 3.0);
}

TEST_CASE("regularizer Hessian at e1, p = 3") {
  // zero Taylor coefficients leave only the regularizer
  arp::DerivativeBundle zero;
  zero.x = Vector::Zero(2);
  for (int j = 1; j <= 3; ++j) zero.derivs.emplace_back(j, 2);
  const arp::ModelState st = arp::make_model_state(zero, 1.0, 3);
  const arp::ModelEval ev = arp::model_eval(st, vec({1, 0}));
  Matrix expect = Matrix::Zero(2, 2);
  expect.diagonal() << 3.0, 1.0;
  CHECK((ev.hessian - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((ev.gradient - vec({1, 0})).norm() < 1e-15);
}

TEST_CASE("model derivatives against finite differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto suite = arp::builtin_suite();
  int cases = 0;
  for (int c = 0; c < 50; ++c) {
    const arp::ProblemSpec& prob = suite[c % suite.size()];
    const int p = 2 + c % 2;
    Vector x(prob.dim), s(prob.dim);
    for (int i = 0; i < prob.dim; ++i) x[i] = 2.0 * u(rng);
    for (int i = 0; i < prob.dim; ++i) s[i] = u(rng);
    if (s.norm() < 0.1) s *= 0.5 / s.norm();
    const double sigma = std::exp(3.0 * u(rng));
    const arp::ModelState st = arp::make_model_state(arp::evaluate_bundle(prob, x, p), sigma, p);
    const arp::ModelEval ev = arp::model_eval(st, s);
    const FiniteDifferences fd = model_fd(st, s, 1e-3);
    CAPTURE(prob.name);
    CAPTURE(p);
    CHECK((ev.gradient - fd.grad).norm() <= 1e-6 * std::max(1.0, ev.gradient.norm()));
    CHECK((ev.hessian - fd.hess).norm() <= 1e-6 * std::max(1.0, ev.hessian.norm()));
    CHECK(ev.value == doctest::Approx(arp::model_value(st, s)).epsilon(1e-14));
    ++cases;
  }
  CHECK(cases == 50);
}

TEST_CASE("make_model_state errors") {
  const arp::ProblemSpec q = arp::make_quadratic(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(arp::make_model_state(arp::evaluate_bundle(q, vec({1, 0}), 2), -1.0, 2),
                  arp::InvalidArgument);
  CHECK_THROWS_AS(arp::make_model_state(arp::evaluate_bundle(q, vec({1, 0}), 2), 1.0, 3),
                  arp::InvalidArgument);
  CHECK_THROWS_AS(arp::model_value(quad_state(1.0, 2), Vector::Zero(3)), arp::InvalidArgument);
}

TEST_CASE("leftmost eigenpair") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 3.0, -5.0;
  const arp::Eigenpair e = arp::leftmost_eigenpair(d);
  CHECK(e.value == -5.0);
  CHECK(std::abs(std::abs(e.vector[1]) - 1.0) < 1e-15);

  const arp::Eigenpair id = arp::leftmost_eigenpair(Matrix::Identity(4, 4));
  CHECK(id.value == doctest::Approx(1.0));
  CHECK(id.vector.norm() == doctest::Approx(1.0));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
    const arp::Eigenpair lm = arp::leftmost_eigenpair(a);
    CHECK(lm.value == doctest::Approx(smallest_root(a)).epsilon(1e-8));
    CHECK((a * lm.vector - lm.value * lm.vector).norm() < 1e-10);
  }

  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = INFINITY;
  CHECK_THROWS_AS(arp::leftmost_eigenpair(bad), arp::InvalidArgument);
}

TEST_CASE("criticality measures") {
  const arp::CriticalityPair a = arp::criticality(vec({3, 4}), Matrix::Identity(2, 2));
  CHECK(a.chi1 == 5.0);
  CHECK(a.chi2 == 0.0);

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1.0, -2.0;
  const arp::CriticalityPair b = arp::criticality(Vector::Zero(2), d);
  CHECK(b.chi1 == 0.0);
  CHECK(b.chi2 == 2.0);

  const auto s = arp::find_problem("saddle");
  const arp::CriticalityPair c =
      arp::objective_criticality(arp::evaluate_bundle(*s, Vector::Zero(2), 2));
  CHECK(c.chi1 == 0.0);
  CHECK(c.chi2 == doctest::Approx(4.0));
}

TEST_CASE("model criticality") {
  // unconstrained minimizer of a convex quadratic model with sigma = 0
  const arp::ModelState st = quad_state(0.0, 2);
  const arp::CriticalityPair at_min = arp::model_criticality(st, vec({-1, 0}));
  CHECK(at_min.chi1 <= 1e-10);
  CHECK(at_min.chi2 == 0.0);

  // sigma = 0, s = 0 is the objective's own criticality
  const auto sad = arp::find_problem("saddle");
  const arp::DerivativeBundle b = arp::evaluate_bundle(*sad, vec({0.3, 0.2}), 2);
  const arp::CriticalityPair m0 =
      arp::model_criticality(arp::make_model_state(b, 0.0, 2), Vector::Zero(2));
  const arp::CriticalityPair f0 = arp::objective_criticality(b);
  CHECK(m0.chi1 == f0.chi1);
  CHECK(m0.chi2 == f0.chi2);

  // inner stationary point of 1 + 2s + s^2 + 2|s|^3
  const arp::ProblemSpec sq = arp::make_quadratic(Matrix::Constant(1, 1, 2.0));
  const arp::ModelState st1 = arp::make_model_state(arp::evaluate_bundle(sq, vec({1}), 2), 6.0, 2);
  CHECK(arp::model_criticality(st1, vec({-0.434259})).chi1 <= 1e-4);
}
