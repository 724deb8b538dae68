#include <doctest.h>

#include <cmath>

#include "medex/errors.hpp"
#include "medex/random.hpp"
#include "medex/restart.hpp"
#include "oracles.hpp"

using namespace medex;

namespace {

Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

RestartConfig restart_cfg(int p, double L, std::size_t outer) {
  RestartConfig c;
  c.inner.order = p;
  c.inner.lipschitz = L;
  c.inner.max_iters = 1;
  c.outer_iters = outer;
  return c;
}

Problem shifted_identity() {
  ProblemDescriptor d;
  d.kind = ProblemKind::strongly_monotone_affine;
  d.matrix = Matrix::Zero(1, 1);
  d.offset = vec({-1.0});
  return make_problem(d);
}

Problem strong_cubic(double radius, int order = 2, int dim = 1) {
  ProblemDescriptor d;
  d.kind = ProblemKind::strongmono_cubic;
  d.mu = 1.0;
  d.radius = radius;
  d.order = order;
  d.dim = dim;
  return make_problem(d);
}

}  // namespace

TEST_CASE("local rate constants") {
  RestartTrace single;
  single.points.push_back(vec({0.01}));
  single.errors.push_back(0.01);
  single.residues.push_back(0.01);
  const LocalRateCertificate p2 = local_rate_certificate(single, 2, 1.0, 1.0);
  CHECK(p2.constant == doctest::Approx(40.0));
  CHECK(p2.basin_radius == doctest::Approx(0.0125));
  CHECK(p2.basin_satisfied);
  CHECK(p2.passed);
  CHECK(p2.step_ok.empty());

  const LocalRateCertificate p1 = local_rate_certificate(single, 1, 1.0, 1.0);
  CHECK(p1.constant == doctest::Approx(12.0));
  CHECK(std::isinf(p1.basin_radius));
}

TEST_CASE("restart on F(x) = x - 1 repeats the single-step recursion") {
  const Problem p = shifted_identity();
  const RestartTrace t = run_restart(restart_cfg(1, 1.0, 20), p, vec({0.0}));
  REQUIRE(t.points.size() == 21);
  const auto first = oracle::scalar_first_order(1.0, -1.0, 1.0, 0.0, 1);
  CHECK(t.points[1][0] == doctest::Approx(first[0].x).epsilon(1e-15));
  for (std::size_t k = 0; k + 1 < t.errors.size(); ++k) {
    // x_{k+1} = x_k - (x_k - 1)/2 halves the error
    CHECK(t.errors[k + 1] == doctest::Approx(0.5 * t.errors[k]).epsilon(1e-12));
  }
  const LocalRateCertificate cert = local_rate_certificate(t, 1, 1.0, 1.0);
  CHECK(cert.passed);
  CHECK(cert.order_estimate == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("restart at the solution stops immediately") {
  const Problem p = shifted_identity();
  const RestartTrace t = run_restart(restart_cfg(1, 1.0, 5), p, vec({1.0}));
  CHECK(t.points.size() == 1);
  CHECK(t.termination == Termination::exact_zero);
}

TEST_CASE("restart configuration requires a single inner iteration") {
  RestartConfig c = restart_cfg(1, 1.0, 5);
  c.inner.max_iters = 2;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
}

TEST_CASE("second-order restart on x + x^3 from 0.4 decays quadratically") {
  const Problem p = strong_cubic(1.0);
  CHECK(p.lipschitz == doctest::Approx(6.0));
  RestartConfig c = restart_cfg(2, p.lipschitz, 12);
  c.stop_residue = 1e-14;
  const RestartTrace t = run_restart(c, p, vec({0.4}));
  CHECK(t.errors.back() <= 1e-13);
  const LocalRateCertificate cert = local_rate_certificate(t, 2, p.lipschitz, 1.0, 1e-13);
  CHECK(cert.passed);
  CHECK_FALSE(cert.basin_satisfied);
  CHECK(cert.order_estimate >= 1.5);
}

TEST_CASE("basin-compliant start satisfies the per-step bound with constant 40") {
  const Problem p = strong_cubic(1.0 / 6.0);
  CHECK(p.lipschitz == doctest::Approx(1.0));
  RestartConfig c = restart_cfg(2, p.lipschitz, 10);
  c.stop_residue = 1e-14;
  const RestartTrace t = run_restart(c, p, vec({0.01}));
  const LocalRateCertificate cert = local_rate_certificate(t, 2, 1.0, 1.0, 1e-13);
  CHECK(cert.constant == doctest::Approx(40.0));
  CHECK(cert.basin_satisfied);
  CHECK(cert.passed);
  for (std::size_t k = 0; k + 1 < t.errors.size(); ++k) {
    if (t.errors[k] >= 1e-13) CHECK(t.errors[k + 1] <= 40.0 * t.errors[k] * t.errors[k] + 1e-12);
  }
  CHECK(cert.order_estimate >= 1.8);
}

TEST_CASE("property: restart residues are nonincreasing on strongly monotone problems") {
  for (int order : {1, 2}) {
    ProblemDescriptor d;
    d.kind = ProblemKind::strongly_monotone_affine;
    d.dim = 5;
    d.order = order;
    d.seed = 9;
    d.skew_scale = 0.3;
    const Problem affine = make_problem(d);
    const Problem cubic = strong_cubic(1.0, order, 3);
    for (const Problem* p : {&affine, &cubic}) {
      Rng rng(10);
      const Point x0 = *p->solution + 0.5 * rng.unit_vector(p->dim);
      const RestartTrace t = run_restart(restart_cfg(order, p->lipschitz, 30), *p, x0);
      for (std::size_t k = 1; k < t.residues.size(); ++k) {
        CHECK_MESSAGE(t.residues[k] <= t.residues[k - 1] * (1 + 1e-9), p->name << " p=" << order);
      }
    }
  }
}
