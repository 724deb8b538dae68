#pragma once

#include <optional>

#include "medex/operator.hpp"

namespace medex {

/// Regularized (p-1)-th order Taylor model of F around a center v:
///
///   F_v(x) = F(v) + sum_{j=1}^{p-1} (1/j!) D^j F(v)[x-v]^j
///            + (2L/(p-1)!) |x-v|^{p-1} (x-v).
///
/// The regularizer is the gradient of a strictly convex function, so F_v is
/// strictly monotone whenever F is monotone and the step equation F_v(x) = 0
/// has exactly one solution.
class TaylorModel {
 public:
  /// Builds the model from the problem's oracles at `center`. Orders >= 3
  /// need `problem.taylor_term`.
  static TaylorModel build(const Problem& problem, const Point& center, int order, double lipschitz);

  /// Model with explicitly supplied F(v) and DF(v) (orders 1 and 2 only;
  /// `jacobian` is ignored for order 1).
  TaylorModel(Point center, int order, double lipschitz, Point value,
              std::optional<Matrix> jacobian = std::nullopt);

  const Point& center() const { return center_; }
  int order() const { return order_; }
  double lipschitz() const { return lipschitz_; }
  const Point& value() const { return value_; }
  /// DF(v); present iff order >= 2.
  const std::optional<Matrix>& jacobian() const { return jacobian_; }
  /// Coefficient 2L/(p-1)! of the regularizer.
  double regularizer_weight() const;

  Point eval(const Point& x) const;
  /// Jacobian of the model at x.
  Matrix eval_jacobian(const Point& x) const;

 private:
  Point center_;
  int order_;
  double lipschitz_;
  Point value_;
  std::optional<Matrix> jacobian_;
  TaylorTermFn higher_terms_;
};

struct StepSolution {
  Point x;
  /// |x - v|
  double step_norm = 0.0;
  /// |F_v(x)|
  double model_residual = 0.0;
  int inner_iterations = 0;
};

/// Free-function spelling of TaylorModel::eval.
Point eval_model(const TaylorModel& model, const Point& x);

/// Closed form x = v - F(v)/(2L) for p = 1.
StepSolution solve_p1(const TaylorModel& model);

struct SecularOptions {
  /// Relative width at which bisection on r stops.
  double tol_r = 1e-12;
  int max_bisections = 200;
  /// Bound enforced on |F_v(x)| / (1 + |F(v)|); violation raises NumericalError.
  double residual_tol = 1e-10;
};

/// p = 2 step. With g = F(v) and J = DF(v), the step is d(r) = -(J + 2 L r I)^{-1} g
/// where r > 0 is a root of phi(r) = |d(r)| - r, bracketed on (r_lo, sqrt(|g|/(2L))]
/// and located by bisection. Requires g != 0.
StepSolution solve_p2_secular(const TaylorModel& model, const SecularOptions& options = {});

/// Where the damped Newton iteration of solve_generic starts.
enum class GenericStart {
  /// Closed-form or secular solution for p <= 2, the center otherwise.
  exact_when_available,
  center,
};

struct GenericOptions {
  double tol = 1e-10;
  int max_inner = 200;
  GenericStart start = GenericStart::exact_when_available;
};

/// Damped Newton on the model with backtracking on |F_v| (step halving down
/// to 2^-30). Succeeds when |F_v(x)| <= tol * (1 + |F(v)|).
StepSolution solve_generic(const TaylorModel& model, const GenericOptions& options = {});

/// Exact solver for p <= 2, solve_generic otherwise. Returns x = v when F(v) = 0.
StepSolution solve_step(const TaylorModel& model, double tol_sub);

}  // namespace medex
