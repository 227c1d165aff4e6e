#include <cmath>

#include "arp/driver.hpp"
#include "arp/errors.hpp"
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

TEST_CASE("sigma update branches") {
  const arp::SolverConfig c;
  arp::UpdateResult r = arp::accept_and_update(1.0, 0.0, 1.0, 1.0, c);
  CHECK(r.rho == 1.0);
  CHECK(r.successful);
  CHECK(r.sigma_next == 0.5);

  r = arp::accept_and_update(1.0, 0.95, 1.0, 3.0, c);
  CHECK(r.rho == doctest::Approx(0.05));
  CHECK_FALSE(r.successful);
  CHECK(r.sigma_next == 6.0);
  CHECK(r.sigma_next >= c.gamma2 * 3.0);
  CHECK(r.sigma_next <= c.gamma3 * 3.0);

  r = arp::accept_and_update(1.0, 0.5, 1.0, 3.0, c);
  CHECK(r.successful);
  CHECK(r.sigma_next == 3.0);

  // floor
  r = arp::accept_and_update(1.0, 0.0, 1.0, 1e-8, c);
  CHECK(r.sigma_next == 1e-8);

  r = arp::accept_and_update(1.0, NAN, 1.0, 1.0, c);
  CHECK_FALSE(r.successful);
  CHECK(r.sigma_next == 2.0);

  CHECK_THROWS_AS(arp::accept_and_update(1.0, 0.0, 0.0, 1.0, c), arp::InvalidArgument);
}

TEST_CASE("termination test") {
  arp::SolverConfig c;
  c.eps1 = 1e-5;
  c.eps2 = 1e-4;
  arp::CriticalityPair pair;
  pair.chi1 = 0.5e-5;
  CHECK(arp::termination_check(pair, c));
  pair.chi1 = 0.0;
  pair.chi2 = 4.0;
  CHECK_FALSE(arp::termination_check(pair, c));
  c.criticality_order = 1;
  CHECK(arp::termination_check(pair, c));
  c.criticality_order = 2;
  pair.chi1 = 2e-5;
  pair.chi2 = 0.0;
  CHECK_FALSE(arp::termination_check(pair, c));
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    arp::SolverConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), arp::InvalidArgument);
  };
  bad([](arp::SolverConfig& c) { c.p = 1; });
  bad([](arp::SolverConfig& c) { c.eps1 = 0.0; });
  bad([](arp::SolverConfig& c) { c.theta = -1.0; });
  bad([](arp::SolverConfig& c) { c.sigma_min = 2.0; });
  bad([](arp::SolverConfig& c) { c.eta1 = 0.95; });
  bad([](arp::SolverConfig& c) { c.gamma2 = 20.0; });
  bad([](arp::SolverConfig& c) { c.criticality_order = 3; });
  CHECK_NOTHROW(arp::SolverConfig{}.validate());

  arp::SolverConfig c;
  c.p = 5;
  CHECK_THROWS_AS(arp::solve(*arp::find_problem("quadratic"), vec({1, 0}), c),
                  arp::UnsupportedOrder);
}

TEST_CASE("solve: convex quadratic") {
  arp::SolverConfig c;
  c.eps1 = c.eps2 = 1e-8;
  const auto q = arp::find_problem("quadratic");
  const arp::Trace t = arp::solve(*q, vec({1, 0}), c);
  CHECK(t.status == arp::Status::kConverged);
  CHECK(t.final_criticality.chi1 <= 1e-8);
  CHECK(t.final_criticality.chi2 == 0.0);
  double prev = t.f0;
  for (const auto& r : t.records) {
    // Taylor model is exact for a quadratic
    CHECK(r.rho == doctest::Approx(1.0).epsilon(1e-12));
    if (r.successful) {
      CHECK(r.f_trial < prev);
      prev = r.f_trial;
    }
  }
}

TEST_CASE("solve: strict saddle") {
  const auto sad = arp::find_problem("saddle");
  arp::SolverConfig c;
  const arp::Trace t = arp::solve(*sad, Vector::Zero(2), c);
  CHECK(t.status == arp::Status::kConverged);
  CHECK(t.total_iterations() > 0);
  CHECK(t.final_criticality.chi1 <= c.eps1);
  CHECK(t.final_criticality.chi2 <= c.eps2);
  CHECK(std::abs(t.final_f + 1.0) <= 1e-6);
  CHECK(std::abs(std::abs(t.final_x[1]) - 1.0) <= 1e-3);

  c.criticality_order = 1;
  const arp::Trace t1 = arp::solve(*sad, Vector::Zero(2), c);
  CHECK(t1.status == arp::Status::kConverged);
  CHECK(t1.total_iterations() == 0);
  CHECK(t1.final_x == Vector::Zero(2));
}

TEST_CASE("solve: iteration cap and accounting") {
  const auto ros = arp::find_problem("rosenbrock");
  arp::SolverConfig c;
  c.max_outer_iterations = 3;
  const arp::Trace t = arp::solve(*ros, ros->default_x0, c);
  CHECK(t.status == arp::Status::kMaxIterations);
  CHECK(t.total_iterations() == 3);
  CHECK(t.f_evaluations == 1 + t.total_iterations());
  CHECK(t.derivative_evaluations == 1 + t.successful_iterations());
  CHECK(arp::to_string(t.status) == "max-iterations");
  CHECK(arp::status_from_string("subsolver-failure") == arp::Status::kSubsolverFailure);
  CHECK_THROWS_AS(arp::status_from_string("done"), arp::InvalidArgument);
}

TEST_CASE("solve: verified mode records trial criticality") {
  const auto ros = arp::find_problem("rosenbrock");
  arp::SolverConfig c;
  c.record_trial_criticality = true;
  const arp::Trace t = arp::solve(*ros, ros->default_x0, c);
  CHECK(t.status == arp::Status::kConverged);
  for (const auto& r : t.records) {
    CHECK(r.chi_f1_next.has_value());
    CHECK(r.chi_f2_next.has_value());
  }
  CHECK(t.verification_evaluations == t.unsuccessful_iterations());
  CHECK(t.f_evaluations == 1 + t.total_iterations());

  // the extra evaluations do not change the iterates
  c.record_trial_criticality = false;
  const arp::Trace plain = arp::solve(*ros, ros->default_x0, c);
  CHECK(plain.final_x == t.final_x);
  CHECK(plain.total_iterations() == t.total_iterations());
}
