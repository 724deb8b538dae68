#include "medex/taylor_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "medex/errors.hpp"

namespace medex {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_center_dim(const TaylorModel& m, const Point& x) {
  if (x.size() != m.center().size()) {
    throw ArgumentError("model point has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(m.center().size()));
  }
}

}  // namespace

TaylorModel TaylorModel::build(const Problem& problem, const Point& center, int order,
                               double lipschitz) {
  check_point(problem, center);
  if (order >= 3 && !problem.has_taylor_terms()) {
    throw UnsupportedError("order " + std::to_string(order) + " needs a higher-derivative oracle");
  }
  std::optional<Matrix> jac;
  if (order >= 2) jac = best_jacobian(problem, center);
  TaylorModel model(center, std::min(order, 2), lipschitz, problem.eval(center), std::move(jac));
  model.order_ = order;
  if (order >= 3) model.higher_terms_ = problem.taylor_term;
  return model;
}

TaylorModel::TaylorModel(Point center, int order, double lipschitz, Point value,
                         std::optional<Matrix> jacobian)
    : center_(std::move(center)),
      order_(order),
      lipschitz_(lipschitz),
      value_(std::move(value)) {
  if (order < 1) throw ArgumentError("model order must be at least 1");
  if (order >= 3) {
    throw UnsupportedError("order " + std::to_string(order) + " needs a higher-derivative oracle");
  }
  if (!(lipschitz > 0.0)) throw ArgumentError("Lipschitz constant must be positive");
  if (value_.size() != center_.size()) throw ArgumentError("F(v) dimension mismatch");
  if (order >= 2) {
    if (!jacobian) throw ArgumentError("order-2 model needs DF(v)");
    if (jacobian->rows() != center_.size() || jacobian->cols() != center_.size()) {
      throw ArgumentError("DF(v) dimension mismatch");
    }
    jacobian_ = std::move(jacobian);
  }
}

double TaylorModel::regularizer_weight() const {
  return 2.0 * lipschitz_ / factorial(order_ - 1);
}

Point TaylorModel::eval(const Point& x) const {
  check_center_dim(*this, x);
  const Point h = x - center_;
  Point out = value_;
  if (order_ >= 2) out += *jacobian_ * h;
  for (int j = 2; j <= order_ - 1; ++j) out += higher_terms_(center_, h, j);
  const double norm_h = h.norm();
  out += regularizer_weight() * std::pow(norm_h, order_ - 1) * h;
  return out;
}

Matrix TaylorModel::eval_jacobian(const Point& x) const {
  check_center_dim(*this, x);
  const auto n = center_.size();
  const Point h = x - center_;
  Matrix out = order_ >= 2 ? *jacobian_ : Matrix::Zero(n, n);

  if (order_ >= 3) {
    // Degree >= 2 terms are low-degree polynomials in h; central differences
    // are exact for the quadratic part and O(step^2) for the cubic part.
    auto poly = [&](const Point& hh) {
      Point acc = Point::Zero(n);
      for (int j = 2; j <= order_ - 1; ++j) acc += higher_terms_(center_, hh, j);
      return acc;
    };
    const double step = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + h.norm());
    Point hp = h;
    Point hm = h;
    for (Eigen::Index j = 0; j < n; ++j) {
      hp[j] = h[j] + step;
      hm[j] = h[j] - step;
      out.col(j) += (poly(hp) - poly(hm)) / (2.0 * step);
      hp[j] = h[j];
      hm[j] = h[j];
    }
  }

  // d/dh [ |h|^q h ] = |h|^q I + q |h|^{q-2} h h^T
  const int q = order_ - 1;
  const double w = regularizer_weight();
  const double norm_h = h.norm();
  if (q == 0) {
    out.diagonal().array() += w;
  } else if (norm_h > 0.0) {
    out.diagonal().array() += w * std::pow(norm_h, q);
    out += w * q * std::pow(norm_h, q - 2) * h * h.transpose();
  }
  return out;
}

Point eval_model(const TaylorModel& model, const Point& x) { return model.eval(x); }

StepSolution solve_p1(const TaylorModel& model) {
  if (model.order() != 1) throw ArgumentError("solve_p1 needs an order-1 model");
  StepSolution out;
  out.x = model.center() - model.value() / (2.0 * model.lipschitz());
  out.step_norm = (out.x - model.center()).norm();
  out.model_residual = model.eval(out.x).norm();
  return out;
}

StepSolution solve_p2_secular(const TaylorModel& model, const SecularOptions& options) {
  if (model.order() != 2) throw ArgumentError("solve_p2_secular needs an order-2 model");
  const Point& g = model.value();
  const double gnorm = g.norm();
  if (gnorm == 0.0) throw ArgumentError("secular solve called at a zero of F");
  const Matrix& J = *model.jacobian();
  const double shift_per_r = 2.0 * model.lipschitz();
  const auto n = g.size();

  int evaluations = 0;
  Matrix shifted(n, n);
  auto step_at = [&](double r) -> Point {
    ++evaluations;
    shifted = J;
    shifted.diagonal().array() += shift_per_r * r;
    Eigen::PartialPivLU<Matrix> lu(shifted);
    Point d = -lu.solve(g);
    if (!d.allFinite()) {
      throw NumericalError("shifted system singular at r = " + std::to_string(r), r);
    }
    return d;
  };

  // |d(r)| <= |g| / (2 L r) because the symmetric part of J is PSD, so
  // phi(r_hi) <= 0 at r_hi = sqrt(|g| / (2L)).
  double hi = std::sqrt(gnorm / shift_per_r);
  Point d_hi = step_at(hi);
  double phi_hi = d_hi.norm() - hi;

  double lo = 1e-16 * (1.0 + hi);
  Point d_lo = step_at(lo);
  double phi_lo = d_lo.norm() - lo;
  // For |g| far below the scale of J the root sits under the default lower
  // endpoint; walk the endpoint down rather than report a false infeasibility.
  while (phi_lo < 0.0 && lo > 1e-290) {
    lo *= 1e-8;
    d_lo = step_at(lo);
    phi_lo = d_lo.norm() - lo;
  }

  Point d;
  double r = 0.0;
  if (phi_hi == 0.0) {
    d = d_hi;
    r = hi;
  } else if (phi_lo == 0.0) {
    d = d_lo;
    r = lo;
  } else {
    if (!(phi_lo > 0.0 && phi_hi < 0.0)) {
      throw InfeasibleError("secular function has equal signs at both bracket ends (phi(" +
                            std::to_string(lo) + ") = " + std::to_string(phi_lo) + ", phi(" +
                            std::to_string(hi) + ") = " + std::to_string(phi_hi) +
                            "); operator is not monotone");
    }
    // Track the evaluated point with the smallest model residual. Since
    // g + J d + 2 L r d = 0, F_v(v + d) = 2 L (|d| - r) d.
    double best_res = std::numeric_limits<double>::infinity();
    auto consider = [&](double rr, const Point& dd, double phi) {
      const double res = shift_per_r * std::abs(phi) * dd.norm();
      if (res < best_res) {
        best_res = res;
        d = dd;
        r = rr;
      }
    };
    consider(lo, d_lo, phi_lo);
    consider(hi, d_hi, phi_hi);
    for (int it = 0; it < options.max_bisections; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Point d_mid = step_at(mid);
      const double phi_mid = d_mid.norm() - mid;
      consider(mid, d_mid, phi_mid);
      if (phi_mid == 0.0) break;
      if (phi_mid > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= options.tol_r * hi) break;
    }
  }

  StepSolution out;
  out.x = model.center() + d;
  out.step_norm = d.norm();
  out.model_residual = model.eval(out.x).norm();
  out.inner_iterations = evaluations;
  if (out.model_residual > options.residual_tol * (1.0 + gnorm)) {
    throw NumericalError("secular step residual " + std::to_string(out.model_residual) +
                             " above tolerance",
                         r);
  }
  return out;
}

StepSolution solve_generic(const TaylorModel& model, const GenericOptions& options) {
  const Point& v = model.center();
  const double scale = 1.0 + model.value().norm();
  const double target = options.tol * scale;

  Point x = v;
  if (options.start == GenericStart::exact_when_available && model.value().norm() > 0.0) {
    if (model.order() == 1) {
      x = solve_p1(model).x;
    } else if (model.order() == 2) {
      SecularOptions sec;
      sec.residual_tol = std::numeric_limits<double>::infinity();
      x = solve_p2_secular(model, sec).x;
    }
  }

  Point fx = model.eval(x);
  double res = fx.norm();
  Point best = x;
  double best_res = res;

  for (int it = 0; it < options.max_inner; ++it) {
    if (res <= target) {
      StepSolution out;
      out.x = x;
      out.step_norm = (x - v).norm();
      out.model_residual = res;
      out.inner_iterations = it;
      return out;
    }
    Matrix jm = model.eval_jacobian(x);
    Point dx = -Eigen::PartialPivLU<Matrix>(jm).solve(fx);
    if (!dx.allFinite()) {
      // singular model Jacobian (e.g. at the center with singular DF(v))
      jm.diagonal().array() += 1e-8 * (1.0 + jm.norm());
      dx = -Eigen::PartialPivLU<Matrix>(jm).solve(fx);
      if (!dx.allFinite()) dx = -fx;
    }

    bool accepted = false;
    for (double t = 1.0; t >= 0x1.0p-30; t *= 0.5) {
      const Point xt = x + t * dx;
      const Point ft = model.eval(xt);
      const double rt = ft.norm();
      if (rt < (1.0 - 1e-4 * t) * res) {
        x = xt;
        fx = ft;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (res < best_res) {
      best = x;
      best_res = res;
    }
    if (!accepted) break;
  }
  if (best_res <= target) {
    StepSolution out;
    out.x = best;
    out.step_norm = (best - v).norm();
    out.model_residual = best_res;
    out.inner_iterations = options.max_inner;
    return out;
  }
  throw NoConvergenceError("damped Newton on the Taylor model did not converge (residual " +
                               std::to_string(best_res) + ")",
                           best, best_res);
}

StepSolution solve_step(const TaylorModel& model, double tol_sub) {
  if (model.value().norm() == 0.0) {
    StepSolution out;
    out.x = model.center();
    return out;
  }
  switch (model.order()) {
    case 1:
      return solve_p1(model);
    case 2: {
      SecularOptions sec;
      sec.residual_tol = tol_sub;
      return solve_p2_secular(model, sec);
    }
    default: {
      GenericOptions gen;
      // Newton starts at the center, which would pass an absolute test once
      // |F(v)| < tol_sub and give a zero step
      gen.tol = tol_sub * std::min(1.0, model.value().norm());
      return solve_generic(model, gen);
    }
  }
}

}  // namespace medex
