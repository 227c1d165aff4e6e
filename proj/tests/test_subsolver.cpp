#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "arp/errors.hpp"
#include "arp/subsolver.hpp"
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

}  // namespace

TEST_CASE("escape step: backtracking on the quadratic") {
  const arp::ProblemSpec q = arp::make_quadratic(Matrix::Identity(2, 2));
  const arp::ModelState st = arp::make_model_state(arp::evaluate_bundle(q, vec({1, 0}), 2), 3.0, 2);
  const Vector s0 = arp::escape_origin_step(st, 1e-6, 2);
  CHECK(s0 == vec({-0.5, 0}));
  CHECK(arp::model_value(st, s0) == 0.25);
}

TEST_CASE("escape step: negative curvature at the saddle") {
  const auto sad = arp::find_problem("saddle");
  const arp::ModelState st =
      arp::make_model_state(arp::evaluate_bundle(*sad, Vector::Zero(2), 2), 1.0, 2);
  const Vector s0 = arp::escape_origin_step(st, 1e-6, 2);
  CHECK(s0[0] == 0.0);
  CHECK(s0[1] != 0.0);
  CHECK(arp::model_value(st, s0) < 0.0);
}

TEST_CASE("escape step: decrease on random states") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& prob : arp::builtin_suite()) {
    for (int i = 0; i < 5; ++i) {
      Vector x(prob.dim);
      for (int j = 0; j < prob.dim; ++j) x[j] = u(rng);
      const int p = 2 + i % 2;
      const arp::DerivativeBundle b = arp::evaluate_bundle(prob, x, p);
      if (b.gradient().norm() <= 1e-6) continue;
      const arp::ModelState st = arp::make_model_state(b, std::exp(u(rng)), p);
      CHECK(arp::model_value(st, arp::escape_origin_step(st, 1e-6, 2)) < b.f);
    }
  }
}

TEST_CASE("escape step: nothing to escape") {
  const arp::ProblemSpec q = arp::make_quadratic(Matrix::Identity(2, 2));
  const arp::ModelState st =
      arp::make_model_state(arp::evaluate_bundle(q, Vector::Zero(2), 2), 1.0, 2);
  CHECK_THROWS_AS(arp::escape_origin_step(st, 1e-6, 2), arp::InternalError);
}

TEST_CASE("trust-region step") {
  Vector lam = vec({1.0, 4.0});
  Matrix q = Matrix::Identity(2, 2);
  // interior Newton step
  Vector s = arp::trust_region_step(vec({1, 1}), lam, q, 10.0);
  CHECK((s - vec({-1.0, -0.25})).norm() < 1e-14);
  // boundary step has the requested length
  s = arp::trust_region_step(vec({1, 1}), lam, q, 0.5);
  CHECK(s.norm() == doctest::Approx(0.5).epsilon(1e-12));
  // hard case: gradient orthogonal to the leftmost eigenvector
  lam = vec({-2.0, 1.0});
  s = arp::trust_region_step(vec({0, 1}), lam, q, 2.0);
  CHECK(s.norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(s[0]) > 1.0);
}

TEST_CASE("model termination conditions") {
  CHECK(arp::model_termination_holds(1.0, 0.0, 1.0, 1.0, 2, 2));
  CHECK_FALSE(arp::model_termination_holds(1.1, 0.0, 1.0, 1.0, 2, 2));
  CHECK_FALSE(arp::model_termination_holds(0.0, 2.0, 1.0, 1.0, 2, 2));
  CHECK(arp::model_termination_holds(0.0, 2.0, 1.0, 1.0, 2, 1));
  // p = 3 scales chi1 by |s|^3 and chi2 by |s|^2
  CHECK(arp::model_termination_holds(0.125, 0.25, 0.5, 1.0, 3, 2));
  CHECK_FALSE(arp::model_termination_holds(0.13, 0.25, 0.5, 1.0, 3, 2));
}

TEST_CASE("minimize: 1-D cubic model") {
  const arp::ProblemSpec sq = arp::make_quadratic(Matrix::Constant(1, 1, 2.0));
  const arp::ModelState st = arp::make_model_state(arp::evaluate_bundle(sq, vec({1}), 2), 6.0, 2);
  // negative root of 2 + 2s - 6s^2
  const double root = (2.0 - std::sqrt(52.0)) / 12.0;
  CHECK(root == doctest::Approx(-0.434259).epsilon(1e-6));

  arp::SubsolverOptions opt;
  opt.theta = 0.5;
  const arp::Step step = arp::minimize_model(st, opt);
  CHECK(step.chi_m2 == 0.0);
  CHECK(step.model_decrease > 0.0);
  // the return is the first inner point meeting the termination test; the
  // model's curvature is at least 2, so |s - s*| <= chi_m1 / 2
  CHECK(step.chi_m1 <= opt.theta * step.s.squaredNorm());
  CHECK(std::abs(step.s[0] - root) <= step.chi_m1 / 2.0 + 1e-15);

  opt.theta = 1e-10;
  const arp::Step tight = arp::minimize_model(st, opt);
  CHECK(tight.s[0] == doctest::Approx(root).epsilon(1e-9));
  CHECK(tight.chi_m1 <= 1e-10);
}

TEST_CASE("minimize: convex quadratic with tiny sigma") {
  const auto prob = arp::find_problem("quadratic_aniso");
  const arp::DerivativeBundle b = arp::evaluate_bundle(*prob, prob->default_x0, 2);
  const arp::ModelState st = arp::make_model_state(b, 1e-6, 2);
  arp::SubsolverOptions opt;
  opt.theta = 1e-6;
  const arp::Step step = arp::minimize_model(st, opt);
  CHECK(step.inner_iterations <= 5);
  CHECK(arp::model_termination_holds(step.chi_m1, step.chi_m2, step.s.norm(), opt.theta, 2, 2));

  // 1-D minimizer of the model along the Newton direction
  const Vector g = b.gradient();
  const Matrix h = b.hessian();
  const Vector d = -h.ldlt().solve(g);
  const double a = 1e-6 * std::pow(d.norm(), 3), bb = d.dot(h * d), c = g.dot(d);
  const double t = (-bb + std::sqrt(bb * bb - 4 * a * c)) / (2 * a);
  CHECK((step.s - t * d).norm() <= 1e-4 * d.norm());
}

TEST_CASE("minimize: saddle against grid search") {
  const auto sad = arp::find_problem("saddle");
  const arp::ModelState st =
      arp::make_model_state(arp::evaluate_bundle(*sad, Vector::Zero(2), 2), 1.0, 2);
  arp::SubsolverOptions opt;
  opt.theta = 0.1;
  const arp::Step step = arp::minimize_model(st, opt);
  CHECK(step.s[1] != 0.0);
  CHECK(step.model_decrease > 0.0);

  // m(s) = -2 s_y^2 + |s|^3 / 3 at the origin; its minimizers (0, +-4)
  // lie outside [-2, 2]^2, so the grid covers [-5, 5]^2
  double best = INFINITY;
  for (int i = -5000; i <= 5000; ++i) {
    for (int j = -5000; j <= 5000; ++j) {
      const double x = i * 1e-3, y = j * 1e-3;
      const double r = std::sqrt(x * x + y * y);
      best = std::min(best, -2.0 * y * y + r * r * r / 3.0);
    }
  }
  CHECK(std::abs(step.model_value - best) <= 1e-2);
}

TEST_CASE("minimize: iteration cap reports failure") {
  const auto ros = arp::find_problem("rosenbrock");
  const arp::ModelState st =
      arp::make_model_state(arp::evaluate_bundle(*ros, ros->default_x0, 3), 1e-3, 3);
  arp::SubsolverOptions opt;
  opt.theta = 1e-12;
  opt.max_inner_iterations = 1;
  try {
    arp::minimize_model(st, opt);
    FAIL("expected SubsolverFailure");
  } catch (const arp::SubsolverFailure& e) {
    CHECK(e.best().model_value < st.bundle.f);
  }
}
