#include "arp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "arp/errors.hpp"

namespace arp {

namespace {

constexpr int kAnalyticOrder = 4;

// d^k/dx^k of x^m.
double monomial_derivative(int m, int k, double x) {
  if (k > m) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= (m - i);
  return c * std::pow(x, m - k);
}

// d^k/dx^k sin(x); cos is sin shifted by one derivative.
double sin_derivative(int k, double x) {
  switch (k % 4) {
    case 0:
      return std::sin(x);
    case 1:
      return std::cos(x);
    case 2:
      return -std::sin(x);
    default:
      return -std::cos(x);
  }
}

// Objective of the form
//   f(x) = sum_c unary(c, x_c) + sum_i pair(x_i, x_{i+1}),
// described through the partial derivatives of its terms. Every derivative
// tensor is supported on indices drawn from at most two adjacent coordinates.
struct ChainTerms {
  // d^alpha/dv^alpha of the term attached to coordinate c.
  std::function<double(int c, int alpha, double v)> unary;
  // d^alpha/da^alpha d^beta/db^beta of the coupling g(a, b).
  std::function<double(int alpha, int beta, double a, double b)> pair;
};

DerivativeBundle evaluate_chain(const ChainTerms& terms, const Vector& x, int order) {
  const int n = static_cast<int>(x.size());
  DerivativeBundle b;
  b.x = x;
  b.f = 0.0;
  for (int c = 0; c < n; ++c) {
    if (terms.unary) b.f += terms.unary(c, 0, x[c]);
    if (terms.pair && c + 1 < n) b.f += terms.pair(0, 0, x[c], x[c + 1]);
  }
  for (int j = 1; j <= order; ++j) {
    b.derivs.push_back(SymTensor::build(j, n, [&](std::span<const int> idx) {
      const int lo = idx.front();
      const int hi = idx.back();
      if (lo == hi) {
        double v = terms.unary ? terms.unary(lo, j, x[lo]) : 0.0;
        if (terms.pair) {
          if (lo + 1 < n) v += terms.pair(j, 0, x[lo], x[lo + 1]);
          if (lo > 0) v += terms.pair(0, j, x[lo - 1], x[lo]);
        }
        return v;
      }
      if (hi == lo + 1 && terms.pair) {
        const int count_lo = static_cast<int>(std::count(idx.begin(), idx.end(), lo));
        return terms.pair(count_lo, j - count_lo, x[lo], x[hi]);
      }
      return 0.0;
    }));
  }
  return b;
}

// 100(b - a^2)^2 + (1 - a)^2 = 100 b^2 - 200 a^2 b + 100 a^4 + 1 - 2a + a^2
double rosenbrock_pair(int alpha, int beta, double a, double b) {
  struct Monomial {
    double coef;
    int pa;
    int pb;
  };
  static constexpr Monomial kTerms[] = {{100.0, 0, 2}, {-200.0, 2, 1}, {100.0, 4, 0},
                                        {1.0, 0, 0},   {-2.0, 1, 0},   {1.0, 2, 0}};
  double v = 0.0;
  for (const Monomial& m : kTerms) {
    v += m.coef * monomial_derivative(m.pa, alpha, a) * monomial_derivative(m.pb, beta, b);
  }
  return v;
}

ProblemSpec chain_problem(std::string name, int n, ChainTerms terms) {
  ProblemSpec p;
  p.name = std::move(name);
  p.dim = n;
  p.max_order = kAnalyticOrder;
  p.evaluator = [terms = std::move(terms)](const Vector& x, int order) {
    return evaluate_chain(terms, x, order);
  };
  return p;
}

}  // namespace

DerivativeBundle evaluate_bundle(const ProblemSpec& problem, const Vector& x, int order) {
  if (order < 0 || order > problem.max_order) {
    throw UnsupportedOrder("problem '" + problem.name + "' provides derivatives up to order " +
                           std::to_string(problem.max_order) + ", requested " +
                           std::to_string(order));
  }
  if (x.size() != problem.dim) {
    throw InvalidArgument("problem '" + problem.name + "' has dimension " +
                          std::to_string(problem.dim) + ", got a point of dimension " +
                          std::to_string(x.size()));
  }
  if (!x.allFinite()) throw InvalidArgument("evaluate_bundle: non-finite point");
  return problem.evaluator(x, order);
}

double evaluate_value(const ProblemSpec& problem, const Vector& x) {
  return evaluate_bundle(problem, x, 0).f;
}

double fd_validate(const ProblemSpec& problem, const Vector& x, int order, double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_validate: h must be positive");
  const DerivativeBundle center = evaluate_bundle(problem, x, order);
  const int n = problem.dim;

  std::vector<DerivativeBundle> plus, minus;
  for (int a = 0; a < n; ++a) {
    Vector e = Vector::Unit(n, a) * h;
    plus.push_back(evaluate_bundle(problem, x + e, order - 1));
    minus.push_back(evaluate_bundle(problem, x - e, order - 1));
  }

  double worst = 0.0;
  for (int j = 1; j <= order; ++j) {
    const SymTensor& analytic = center.derivative(j);
    double scale = 1.0;
    for (double v : analytic.packed()) scale = std::max(scale, std::abs(v));
    analytic.for_each_index([&](std::span<const int> idx, std::size_t pos) {
      const int a = idx[0];
      double up, down;
      if (j == 1) {
        up = plus[a].f;
        down = minus[a].f;
      } else {
        std::span<const int> rest = idx.subspan(1);
        up = plus[a].derivative(j - 1)(rest);
        down = minus[a].derivative(j - 1)(rest);
      }
      const double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic.packed()[pos] - fd) / scale);
    });
  }
  return worst;
}

ProblemSpec make_quadratic(const Matrix& a, std::string name) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw InvalidArgument("make_quadratic: matrix must be square and non-empty");
  }
  const Matrix sym = 0.5 * (a + a.transpose());
  if (Eigen::LLT<Matrix>(sym).info() != Eigen::Success) {
    throw InvalidArgument("make_quadratic: matrix is not positive definite");
  }
  const int n = static_cast<int>(a.rows());
  ProblemSpec p;
  p.name = std::move(name);
  p.dim = n;
  p.max_order = kAnalyticOrder;
  p.evaluator = [sym](const Vector& x, int order) {
    DerivativeBundle b;
    b.x = x;
    const Vector ax = sym * x;
    b.f = 0.5 * x.dot(ax);
    for (int j = 1; j <= order; ++j) {
      if (j == 1) {
        b.derivs.push_back(SymTensor::from_vector(ax));
      } else if (j == 2) {
        b.derivs.push_back(SymTensor::from_matrix(sym));
      } else {
        b.derivs.emplace_back(j, static_cast<int>(x.size()));
      }
    }
    return b;
  };
  // Second derivative is constant, all higher ones vanish.
  p.constants.lipschitz = {{2, 0.0}, {3, 0.0}, {4, 0.0}};
  p.constants.f_low = 0.0;
  p.constants.known_minimizers = {Vector::Zero(n)};
  p.default_x0 = Vector::Zero(n);
  p.default_x0[0] = 1.0;
  return p;
}

ProblemSpec make_separable_quartic(int n) {
  ProblemSpec p = chain_problem(
      "quartic", n,
      {[](int, int alpha, double v) { return monomial_derivative(4, alpha, v); }, nullptr});
  // sup over the box of ||D^3 f||_[3] = 24 * 5; D^3 f is 24 diag(x), so
  // (3-1)! L = 24 globally; D^4 f is constant.
  p.constants.lipschitz = {{2, 120.0}, {3, 12.0}, {4, 0.0}};
  p.constants.f_low = 0.0;
  p.constants.known_minimizers = {Vector::Zero(n)};
  p.default_x0 = Vector::LinSpaced(n, 1.5, -1.0);
  return p;
}

ProblemSpec make_rosenbrock() {
  ProblemSpec p = make_chained_rosenbrock(2);
  p.name = "rosenbrock";
  return p;
}

ProblemSpec make_chained_rosenbrock(int n) {
  if (n < 2) throw InvalidArgument("make_chained_rosenbrock: n must be >= 2");
  ProblemSpec p = chain_problem("rosenbrock_chained", n, {nullptr, rosenbrock_pair});
  // D^3 f[v]^3 = sum_i 2400 x_i v_i^3 - 1200 v_i^2 v_{i+1}: bounded by
  // 2400*5 + 1200 on the box. Only the 2400 x_i v_i^3 part varies, so
  // (3-1)! L = 2400 globally. D^4 f is constant.
  p.constants.lipschitz = {{2, 13200.0}, {3, 1200.0}, {4, 0.0}};
  p.constants.f_low = 0.0;
  p.constants.known_minimizers = {Vector::Ones(n)};
  p.default_x0 = Vector(n);
  for (int i = 0; i < n; ++i) p.default_x0[i] = (i % 2 == 0) ? -1.2 : 1.0;
  return p;
}

ProblemSpec make_strict_saddle() {
  // f(x, y) = x^4 + y^4 - 2 y^2
  ProblemSpec p = chain_problem(
      "saddle", 2,
      {[](int c, int alpha, double v) {
         double r = monomial_derivative(4, alpha, v);
         if (c == 1) r -= 2.0 * monomial_derivative(2, alpha, v);
         return r;
       },
       nullptr});
  p.constants.lipschitz = {{2, 120.0}, {3, 12.0}, {4, 0.0}};
  p.constants.f_low = -1.0;
  p.constants.known_minimizers = {Vector{{0.0, 1.0}}, Vector{{0.0, -1.0}}};
  p.constants.known_saddles = {Vector::Zero(2)};
  p.default_x0 = Vector{{0.6, 0.05}};
  return p;
}

ProblemSpec make_trig(int n) {
  // f(x) = sum_i [c4 x_i^4 + cos(w x_i)] + b sum_i sin(x_i) sin(x_{i+1})
  constexpr double c4 = 0.01;
  constexpr double w = 2.0;
  constexpr double b = 0.5;
  ProblemSpec p = chain_problem(
      "trig", n,
      {[](int, int alpha, double v) {
         return c4 * monomial_derivative(4, alpha, v) +
                std::pow(w, alpha) * sin_derivative(alpha + 1, w * v);
       },
       [](int alpha, int beta, double x, double y) {
         return b * sin_derivative(alpha, x) * sin_derivative(beta, y);
       }});
  // Injective norms of the separable part are bounded by the largest
  // diagonal coefficient; the coupling contributes at most
  // |b| sum_i (|v_i| + |v_{i+1}|)^k <= |b| 2^(k-1) * 2.
  p.constants.lipschitz = {{2, 24.0 * c4 * 5.0 + w * w * w + 8.0 * b},
                           {3, (24.0 * c4 + std::pow(w, 4) + 16.0 * b) / 2.0},
                           {4, (std::pow(w, 5) + 32.0 * b) / 6.0}};
  p.constants.f_low = -static_cast<double>(n) - (n - 1) * b;
  p.default_x0 = Vector::LinSpaced(n, 0.9, -1.7);
  for (int i = 1; i < n; i += 2) p.default_x0[i] += 2.1;
  return p;
}

std::vector<ProblemSpec> builtin_suite() {
  Matrix aniso = Vector{{1.0, 2.0, 5.0, 10.0, 20.0}}.asDiagonal();
  for (int i = 0; i + 1 < 5; ++i) aniso(i, i + 1) = aniso(i + 1, i) = 0.3;
  ProblemSpec quadratic_aniso = make_quadratic(aniso, "quadratic_aniso");
  quadratic_aniso.default_x0 = Vector::Ones(5);

  return {make_quadratic(Matrix::Identity(2, 2)),
          quadratic_aniso,
          make_separable_quartic(3),
          make_rosenbrock(),
          make_chained_rosenbrock(10),
          make_strict_saddle(),
          make_trig(4)};
}

std::optional<ProblemSpec> find_problem(const std::string& name) {
  for (ProblemSpec& p : builtin_suite()) {
    if (p.name == name) return std::move(p);
  }
  return std::nullopt;
}

}  // namespace arp
