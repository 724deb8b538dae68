#include <doctest.h>

#include "medex/errors.hpp"
#include "medex/merit.hpp"
#include "medex/random.hpp"
#include "oracles.hpp"

using namespace medex;

namespace {

Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

Problem identity_1d() {
  ProblemDescriptor d;
  d.kind = ProblemKind::strongly_monotone_affine;
  d.matrix = Matrix::Zero(1, 1);
  d.offset = vec({0.0});
  return make_problem(d);
}

std::vector<Problem> affine_zoo(int dim, std::uint64_t seed) {
  std::vector<Problem> out;
  for (ProblemKind kind : {ProblemKind::affine_monotone, ProblemKind::bilinear_saddle,
                           ProblemKind::strongly_monotone_affine}) {
    ProblemDescriptor d;
    d.kind = kind;
    d.dim = kind == ProblemKind::bilinear_saddle ? dim + dim % 2 : dim;
    d.seed = seed;
    out.push_back(make_problem(d));
  }
  return out;
}

}  // namespace

TEST_CASE("one-dimensional merit examples") {
  const MeritSpec spec = MeritSpec::make(identity_1d(), vec({0.0}), 1.0);
  // sup_{|z|<=1} z (0 - z) = 0 and sup z (1 - z) = 1/4
  CHECK(merit_affine_exact(spec, vec({0.0})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(merit_affine_exact(spec, vec({1.0})) == doctest::Approx(0.25).epsilon(1e-10));
  const MeritMaximum m = merit_affine_maximize(spec, vec({1.0}));
  CHECK(m.maximizer[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m.converged);
}

TEST_CASE("merit spec radius defaults and validation") {
  ProblemDescriptor d;
  d.kind = ProblemKind::bilinear_saddle;
  d.dim = 4;
  d.seed = 1;
  const Problem p = make_problem(d);
  const Point x0 = *p.solution + vec({1.0, 0.0, 0.0, 0.0});
  CHECK(MeritSpec::make(p, x0).radius == doctest::Approx(2.0));
  CHECK_THROWS_AS(MeritSpec::make(p, x0, 0.5), ArgumentError);
  CHECK_THROWS_AS(MeritSpec::make(p, x0, -1.0), ArgumentError);
  Problem unknown = p;
  unknown.solution.reset();
  CHECK_THROWS_AS(MeritSpec::make(unknown, x0), ArgumentError);
  CHECK(MeritSpec::make(unknown, x0, 3.0).radius == 3.0);
}

TEST_CASE("exact merit needs an affine operator") {
  ProblemDescriptor d;
  d.kind = ProblemKind::cubic_grad;
  d.dim = 2;
  const Problem p = make_problem(d);
  const MeritSpec spec = MeritSpec::make(p, vec({0.5, 0.0}));
  CHECK_THROWS_AS(merit_affine_exact(spec, vec({0.1, 0.1})), UnsupportedError);
}

TEST_CASE("property: merit is nonnegative and vanishes at the solution") {
  for (const Problem& p : affine_zoo(6, 17)) {
    Rng rng(18);
    const Point x0 = *p.solution + rng.unit_vector(p.dim);
    const MeritSpec spec = MeritSpec::make(p, x0);
    CHECK(merit_affine_exact(spec, *p.solution) <= 1e-10);
    for (int i = 0; i < 20; ++i) {
      const Point x = rng.in_ball(x0, 5.0);
      CHECK_MESSAGE(merit_affine_exact(spec, x) >= 0.0, p.name);
    }
  }
}

TEST_CASE("property: sampled merit is a lower bound that gets close on 3-D problems") {
  for (std::uint64_t seed : {1u, 2u}) {
    for (const Problem& p : affine_zoo(3, seed)) {
      Rng rng(seed + 40);
      const Point x0 = *p.solution + rng.unit_vector(p.dim);
      const MeritSpec spec = MeritSpec::make(p, x0);
      for (int i = 0; i < 5; ++i) {
        const Point x = rng.in_ball(x0, 2.0);
        const double exact = merit_affine_exact(spec, x);
        const double sampled = merit_sampled(spec, x, 16, 99).value;
        CHECK(sampled <= exact + 1e-8);
        CHECK(sampled >= exact - 1e-4);
      }
    }
  }
}

TEST_CASE("sampled merit examples") {
  ProblemDescriptor d;
  d.kind = ProblemKind::cubic_grad;
  d.dim = 2;
  const Problem p = make_problem(d);
  const MeritSpec spec = MeritSpec::make(p, vec({0.5, 0.0}));
  // a zero of F inside the ball: the sup is 0
  CHECK(merit_sampled(spec, Point::Zero(2), 1, 3).value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(merit_sampled(spec, vec({3.0, 3.0}), 4, 3).value > 0.0);
  const MeritLowerBound lb = merit_sampled(spec, vec({0.7, -0.2}), 8, 3);
  CHECK((lb.maximizer - spec.anchor).norm() <= spec.radius * (1 + 1e-12));
  CHECK(lb.value == doctest::Approx(merit_objective(p, lb.maximizer, vec({0.7, -0.2}))));
}

TEST_CASE("exact merit agrees with a brute-force grid on a 3-D instance") {
  ProblemDescriptor d;
  d.kind = ProblemKind::affine_monotone;
  d.dim = 3;
  d.seed = 123;
  const Problem p = make_problem(d);
  Rng rng(124);
  const Point x0 = *p.solution + rng.unit_vector(3);
  const MeritSpec spec = MeritSpec::make(p, x0);
  const Point x = rng.in_ball(x0, 1.5);
  const double exact = merit_affine_exact(spec, x);
  const double grid =
      oracle::merit_grid(p.affine->A, p.affine->b, x, x0, spec.radius, 0.02 * spec.radius);
  CHECK(std::abs(exact - grid) <= 1e-6);
}

TEST_CASE("projected ascent from a poor warm start still certifies the maximum") {
  const MeritSpec spec = MeritSpec::make(identity_1d(), vec({0.0}), 1.0);
  const MeritMaximum m = merit_affine_maximize(spec, vec({1.0}), 1e-10, 2000000, vec({-1.0}));
  CHECK(m.converged);
  CHECK(m.value == doctest::Approx(0.25).epsilon(1e-9));
}
