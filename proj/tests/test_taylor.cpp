#include <doctest.h>

#include <cmath>

#include "medex/errors.hpp"
#include "medex/random.hpp"
#include "medex/taylor_model.hpp"
#include "oracles.hpp"

using namespace medex;

namespace {

Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

Matrix mat1(double a) { return Matrix::Constant(1, 1, a); }

Matrix skew2() {
  Matrix J(2, 2);
  J << 0, 1, -1, 0;
  return J;
}

Matrix random_monotone(Rng& rng, int n) {
  const Matrix g = rng.normal_matrix(n, n);
  const Matrix u = rng.normal_matrix(n, n);
  return g.transpose() * g / n + (u - u.transpose());
}

}  // namespace

TEST_CASE("eval_model examples") {
  const TaylorModel m1(vec({1.0}), 1, 1.0, vec({1.0}));
  CHECK(eval_model(m1, vec({1.0}))[0] == 1.0);
  CHECK(eval_model(m1, vec({0.5}))[0] == doctest::Approx(0.0).epsilon(1e-15));

  const TaylorModel m2(vec({1.0}), 2, 1.0, vec({1.0}), mat1(1.0));
  CHECK(eval_model(m2, vec({0.5}))[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eval_model(m2, vec({1.0}))[0] == 1.0);
}

TEST_CASE("order 3 without a higher-derivative oracle is unsupported") {
  CHECK_THROWS_AS(TaylorModel(vec({1.0}), 3, 1.0, vec({1.0}), mat1(1.0)), UnsupportedError);
  ProblemDescriptor d;
  d.kind = ProblemKind::bilinear_saddle;
  Problem p = make_problem(d);
  p.taylor_term = nullptr;
  CHECK_THROWS_AS(TaylorModel::build(p, Point::Zero(2), 3, 1.0), UnsupportedError);
}

TEST_CASE("solve_p1 examples") {
  const TaylorModel zero(vec({4.0}), 1, 1.0, vec({0.0}));
  CHECK(solve_step(zero, 1e-10).x[0] == 4.0);

  const StepSolution s = solve_p1(TaylorModel(vec({1.0}), 1, 1.0, vec({1.0})));
  CHECK(s.x[0] == 0.5);
  CHECK(s.step_norm == 0.5);

  const StepSolution s2 = solve_p1(TaylorModel(vec({0.0, 0.0}), 1, 0.5, vec({2.0, 0.0})));
  CHECK(s2.x[0] == -2.0);
  CHECK(s2.x[1] == 0.0);
  CHECK(s2.step_norm == 2.0);
  CHECK(s2.model_residual == 0.0);
}

TEST_CASE("solve_p2_secular on the 1-D example") {
  const TaylorModel m(vec({1.0}), 2, 1.0, vec({1.0}), mat1(1.0));
  const StepSolution s = solve_p2_secular(m);
  // 1 + d - 2 d^2 = 0 with d < 0 gives d = -1/2
  CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.step_norm == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eval_model(m, s.x).norm() <= 1e-10 * 2.0);
}

TEST_CASE("solve_p2_secular on the 2-D skew example matches an independent root-find") {
  const TaylorModel m(vec({0.0, 0.0}), 2, 0.5, vec({1.0, 0.0}), skew2());
  const StepSolution s = solve_p2_secular(m);
  // |(J + r I)^{-1} g|^2 = 1 / (1 + r^2), so r^2 (1 + r^2) = 1
  const double r = oracle::bisect([](double x) { return x * x * (1 + x * x) - 1.0; }, 0.0, 1.0);
  CHECK(r == doctest::Approx(0.786151377757423).epsilon(1e-12));
  CHECK(s.step_norm == doctest::Approx(r).epsilon(1e-10));
  Matrix shifted = skew2();
  shifted.diagonal().array() += r;
  const Point d = -shifted.inverse() * vec({1.0, 0.0});
  CHECK((s.x - d).norm() <= 1e-10);
  CHECK(s.model_residual <= 1e-10 * 2.0);
}

TEST_CASE("solve_p2_secular flags a non-monotone model") {
  // J = -1: phi(r) = 1/|2r - 1| - r is positive at both ends of (0, 1/sqrt(2)]
  const TaylorModel m(vec({0.0}), 2, 1.0, vec({1.0}), mat1(-1.0));
  CHECK_THROWS_AS(solve_p2_secular(m), InfeasibleError);
}

TEST_CASE("solve_p2_secular refuses the zero gradient") {
  const TaylorModel m(vec({0.0}), 2, 1.0, vec({0.0}), mat1(1.0));
  CHECK_THROWS_AS(solve_p2_secular(m), ArgumentError);
  CHECK(solve_step(m, 1e-10).x[0] == 0.0);
}

TEST_CASE("solve_generic agrees with the exact solvers") {
  GenericOptions from_center;
  from_center.start = GenericStart::center;

  const TaylorModel m1(vec({1.0, -2.0}), 1, 0.7, vec({0.3, 1.1}));
  CHECK((solve_generic(m1).x - solve_p1(m1).x).norm() <= 1e-12);
  CHECK((solve_generic(m1, from_center).x - solve_p1(m1).x).norm() <= 1e-10);

  const TaylorModel m2(vec({1.0}), 2, 1.0, vec({1.0}), mat1(1.0));
  CHECK(solve_generic(m2, from_center).x[0] == doctest::Approx(0.5).epsilon(1e-9));

  const TaylorModel sk(vec({0.0, 0.0}), 2, 0.5, vec({1.0, 0.0}), skew2());
  CHECK((solve_generic(sk, from_center).x - solve_p2_secular(sk).x).norm() <= 1e-8);
}

TEST_CASE("solve_generic reports no convergence with its best iterate") {
  const TaylorModel m(vec({0.0}), 2, 3.0, vec({0.7}), mat1(1.3));
  GenericOptions opts;
  opts.start = GenericStart::center;
  opts.max_inner = 1;
  opts.tol = 1e-300;
  try {
    solve_generic(m, opts);
    FAIL("expected NoConvergenceError");
  } catch (const NoConvergenceError& e) {
    CHECK(e.best().size() == 1);
    CHECK(e.best_residual() < 1.0);
  }
}

TEST_CASE("property: secular steps are exact on seeded monotone instances") {
  Rng rng(404);
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform() * 20) % 20;
    const double L = (i % 3 == 0) ? 0.5 : (i % 3 == 1 ? 1.0 : 2.0);
    const Point g = rng.normal_vector(n);
    const TaylorModel m(rng.normal_vector(n), 2, L, g, random_monotone(rng, n));
    const StepSolution s = solve_p2_secular(m);
    CHECK(eval_model(m, s.x).norm() <= 1e-10 * (1.0 + g.norm()));
  }
}

TEST_CASE("property: the secular function changes sign on the bracket") {
  Rng rng(405);
  for (int i = 0; i < 30; ++i) {
    const int n = 1 + i % 8;
    const double L = 0.5 + rng.uniform();
    const Point g = rng.normal_vector(n);
    const Matrix J = random_monotone(rng, n);
    auto phi = [&](double r) {
      Matrix shifted = J;
      shifted.diagonal().array() += 2.0 * L * r;
      return (shifted.lu().solve(g)).norm() - r;
    };
    const double hi = std::sqrt(g.norm() / (2.0 * L));
    CHECK(phi(hi) <= 0.0);
    CHECK(phi(1e-16 * (1.0 + hi)) > 0.0);
  }
}

TEST_CASE("property: the regularized model is strictly monotone") {
  Rng rng(406);
  for (int order : {1, 2}) {
    for (int i = 0; i < 20; ++i) {
      const int n = 1 + i % 6;
      const Matrix J = random_monotone(rng, n);
      const TaylorModel m = order == 1
                                ? TaylorModel(rng.normal_vector(n), 1, 1.0, rng.normal_vector(n))
                                : TaylorModel(rng.normal_vector(n), 2, 1.0, rng.normal_vector(n), J);
      for (int k = 0; k < 10; ++k) {
        const Point x = rng.normal_vector(n);
        const Point y = rng.normal_vector(n);
        CHECK((m.eval(x) - m.eval(y)).dot(x - y) > 0.0);
      }
    }
  }
}

TEST_CASE("order-3 model built from the cubic oracle is solved by damped Newton") {
  ProblemDescriptor d;
  d.kind = ProblemKind::cubic_grad;
  d.dim = 3;
  d.order = 3;
  const Problem p = make_problem(d);
  Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    const Point v = rng.in_ball(Point::Zero(3), 1.0);
    const TaylorModel m = TaylorModel::build(p, v, 3, p.lipschitz);
    const StepSolution s = solve_step(m, 1e-10);
    CHECK(s.model_residual <= 1e-10 * (1.0 + p.eval(v).norm()));
    CHECK(m.eval(s.x).norm() == doctest::Approx(s.model_residual).epsilon(1e-6));
  }
}
