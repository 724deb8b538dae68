#include "medex/operator.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "medex/errors.hpp"

namespace medex {

double JacobianOracle::default_fd_step() {
  return std::cbrt(std::numeric_limits<double>::epsilon());
}

bool all_finite(const Point& x) { return x.allFinite(); }

void check_point(const Problem& problem, const Point& x) {
  if (x.size() != problem.dim) {
    throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", problem '" +
                        problem.name + "' expects " + std::to_string(problem.dim));
  }
  if (!x.allFinite()) throw ArgumentError("point has non-finite entries");
}

double residue(const Problem& problem, const Point& x) {
  check_point(problem, x);
  return problem.eval(x).norm();
}

Matrix jacobian(const Problem& problem, const Point& x, const JacobianOracle& oracle) {
  check_point(problem, x);
  if (oracle.mode == JacobianMode::analytic) {
    if (!problem.has_jacobian()) {
      throw ConfigurationError("problem '" + problem.name + "' has no analytic Jacobian");
    }
    return problem.jac(x);
  }
  if (!(oracle.fd_step > 0.0)) throw ConfigurationError("fd_step must be positive");
  const double h = oracle.fd_step * (1.0 + x.norm());
  Matrix J(problem.dim, problem.dim);
  Point xp = x;
  Point xm = x;
  for (int j = 0; j < problem.dim; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (problem.eval(xp) - problem.eval(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

Matrix best_jacobian(const Problem& problem, const Point& x) {
  JacobianOracle oracle;
  oracle.mode = problem.has_jacobian() ? JacobianMode::analytic : JacobianMode::central_difference;
  return jacobian(problem, x, oracle);
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace medex
