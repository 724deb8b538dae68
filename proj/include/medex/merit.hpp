#pragma once

#include <cstdint>
#include <optional>

#include "medex/operator.hpp"

namespace medex {

/// Restricted merit function
///
///   merit(x) = sup { <F(z), x - z> : |z - x_0| <= D },
///
/// which is nonnegative and vanishes exactly at zeros of F as long as the
/// ball contains one.
struct MeritSpec {
  Problem problem;
  Point anchor;
  double radius = 1.0;

  /// D defaults to 2 |x_0 - x*| when the solution is known. Throws
  /// ArgumentError when the ball misses a known solution or D is not given
  /// and cannot be derived.
  static MeritSpec make(const Problem& problem, const Point& anchor,
                        std::optional<double> radius = std::nullopt);
};

struct MeritMaximum {
  double value = 0.0;
  Point maximizer;
  int iterations = 0;
  bool converged = false;
};

/// Maximizes the concave quadratic <A z + b, x - z> over the ball for affine
/// F(z) = A z + b. The start is the trust-region solution from an eigen
/// decomposition of sym(A) (or `warm_start`); projected gradient ascent with
/// step 1/(2 |sym(A)| + 1) then runs until the projected-gradient norm is
/// <= tol, which certifies global optimality by concavity.
MeritMaximum merit_affine_maximize(const MeritSpec& spec, const Point& x, double tol = 1e-10,
                                   int max_iters = 2000000,
                                   const std::optional<Point>& warm_start = std::nullopt);

/// Value of merit_affine_maximize, clamped at 0 when it lies in [-tol, 0).
/// Throws UnsupportedError for non-affine problems, NoConvergenceError when
/// the iteration budget runs out and InternalInconsistencyError on values
/// below -tol.
double merit_affine_exact(const MeritSpec& spec, const Point& x, double tol = 1e-10);

struct MeritLowerBound {
  double value = 0.0;
  Point maximizer;
};

/// Multi-start projected gradient ascent for general F. The first start is
/// the projection of x onto the ball, the rest are seeded uniform draws in
/// the ball. Every candidate is feasible, so the result is a lower bound.
MeritLowerBound merit_sampled(const MeritSpec& spec, const Point& x, int n_starts,
                              std::uint64_t seed);

/// <F(z), x - z>
double merit_objective(const Problem& problem, const Point& z, const Point& x);

Point project_to_ball(const Point& z, const Point& center, double radius);

}  // namespace medex
