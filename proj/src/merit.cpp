#include "medex/merit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "medex/errors.hpp"
#include "medex/random.hpp"

namespace medex {
namespace {

// Maximizer of <A z + b, x - z> over |z - c| <= D. With y = z - c the
// objective is g.y - y^T S y + const, g = A^T (x - c) - (A c + b), S = sym(A)
// PSD, so y = (2S + 2 nu I)^{-1} g with nu >= 0 fixed by |y| = D or nu = 0.
Point affine_trust_region_maximizer(const Matrix& sym, const Matrix& A, const Point& b,
                                    const Point& x, const Point& c, double D) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Point g = A.transpose() * (x - c) - (A * c + b);
  const Point gq = eig.eigenvectors().transpose() * g;
  const double gnorm = g.norm();
  if (gnorm == 0.0) return c;
  const double cut = 1e-14 * (1.0 + lam.maxCoeff());

  auto coords = [&](double nu) {
    Point y(gq.size());
    for (Eigen::Index i = 0; i < gq.size(); ++i) {
      const double den = 2.0 * (lam[i] + nu);
      y[i] = den > 0.0 ? gq[i] / den : 0.0;
    }
    return y;
  };

  // nu = 0 is optimal when g lies in range(S) and the least-norm solution fits.
  bool in_range = true;
  for (Eigen::Index i = 0; i < gq.size(); ++i) {
    if (lam[i] <= cut && std::abs(gq[i]) > 1e-14 * gnorm) in_range = false;
  }
  if (in_range) {
    Point y = coords(0.0);
    for (Eigen::Index i = 0; i < gq.size(); ++i)
      if (lam[i] <= cut) y[i] = 0.0;
    if (y.norm() <= D) return c + eig.eigenvectors() * y;
  }

  // |y(nu)| decreases in nu and |y(nu)| <= |g| / (2 nu).
  double lo = 0.0;
  double hi = gnorm / (2.0 * D);
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (coords(mid).norm() > D) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Point y = coords(hi);
  const double yn = y.norm();
  if (yn > 0.0) y *= D / yn;
  return c + eig.eigenvectors() * y;
}

}  // namespace

MeritSpec MeritSpec::make(const Problem& problem, const Point& anchor,
                          std::optional<double> radius) {
  check_point(problem, anchor);
  MeritSpec spec{problem, anchor, 0.0};
  if (radius) {
    spec.radius = *radius;
  } else if (problem.solution) {
    spec.radius = 2.0 * (anchor - *problem.solution).norm();
  } else {
    throw ArgumentError("merit radius needed when the solution is unknown");
  }
  if (!(spec.radius > 0.0)) throw ArgumentError("merit radius must be positive");
  if (problem.solution && (anchor - *problem.solution).norm() > spec.radius) {
    throw ArgumentError("merit ball does not contain the known solution");
  }
  return spec;
}

Point project_to_ball(const Point& z, const Point& center, double radius) {
  const Point d = z - center;
  const double n = d.norm();
  if (n <= radius) return z;
  return center + (radius / n) * d;
}

double merit_objective(const Problem& problem, const Point& z, const Point& x) {
  return problem.eval(z).dot(x - z);
}

MeritMaximum merit_affine_maximize(const MeritSpec& spec, const Point& x, double tol,
                                   int max_iters, const std::optional<Point>& warm_start) {
  if (!spec.problem.affine) {
    throw UnsupportedError("exact merit needs an affine operator; '" + spec.problem.name +
                           "' is not");
  }
  check_point(spec.problem, x);
  const Matrix& A = spec.problem.affine->A;
  const Point& b = spec.problem.affine->b;
  const Matrix sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double sym_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double eta = 1.0 / (2.0 * sym_norm + 1.0);

  // grad of <Az + b, x - z> is A^T x - b - (A + A^T) z
  const Point lin = A.transpose() * x - b;
  const Matrix quad = A + A.transpose();

  MeritMaximum out;
  Point z = warm_start ? project_to_ball(*warm_start, spec.anchor, spec.radius)
                       : affine_trust_region_maximizer(sym, A, b, x, spec.anchor, spec.radius);
  for (int it = 0; it < max_iters; ++it) {
    const Point grad = lin - quad * z;
    const Point next = project_to_ball(z + eta * grad, spec.anchor, spec.radius);
    const double pg = (next - z).norm() / eta;
    z = next;
    out.iterations = it + 1;
    if (pg <= tol) {
      out.converged = true;
      break;
    }
  }
  out.value = (A * z + b).dot(x - z);
  out.maximizer = std::move(z);
  return out;
}

double merit_affine_exact(const MeritSpec& spec, const Point& x, double tol) {
  const MeritMaximum m = merit_affine_maximize(spec, x, tol);
  if (!m.converged) {
    throw NoConvergenceError("merit ascent hit its iteration budget", m.maximizer, m.value);
  }
  if (m.value < -tol) {
    throw InternalInconsistencyError("merit evaluated to " + std::to_string(m.value) +
                                     " although it is nonnegative");
  }
  return std::max(m.value, 0.0);
}

MeritLowerBound merit_sampled(const MeritSpec& spec, const Point& x, int n_starts,
                              std::uint64_t seed) {
  check_point(spec.problem, x);
  if (n_starts < 1) throw ArgumentError("merit_sampled needs at least one start");
  Rng rng(seed);
  const Problem& problem = spec.problem;

  MeritLowerBound best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < n_starts; ++start) {
    Point z = start == 0 ? project_to_ball(x, spec.anchor, spec.radius)
                         : rng.in_ball(spec.anchor, spec.radius);
    double value = merit_objective(problem, z, x);
    double eta = 1.0;
    for (int it = 0; it < 5000 && eta > 1e-14; ++it) {
      const Point fz = problem.eval(z);
      const Point grad = best_jacobian(problem, z).transpose() * (x - z) - fz;
      bool moved = false;
      while (eta > 1e-14) {
        const Point trial = project_to_ball(z + eta * grad, spec.anchor, spec.radius);
        const double step = (trial - z).norm();
        if (step <= 1e-12 * (1.0 + z.norm())) {
          eta = 0.0;  // stationary
          break;
        }
        const double tv = merit_objective(problem, trial, x);
        if (tv > value) {
          z = trial;
          value = tv;
          eta *= 2.0;
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!moved) break;
    }
    if (value > best.value) {
      best.value = value;
      best.maximizer = z;
    }
  }
  return best;
}

}  // namespace medex
