#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "medex/operator.hpp"

namespace medex {

/// Integration settings for the rescaled gradient flow
///
///   s' = -F(x) / |F(x)|^{1-1/p},   v = x_0 + s,   x - v + F(x) / |F(x)|^{1-1/p} = 0,
///
/// treated as an ODE in v (explicit Euler) with x recovered from v by the
/// algebraic equation F(x) + |x - v|^{p-1} (x - v) = 0 at every step.
struct FlowConfig {
  int order = 1;
  double step = 1e-3;
  double t_max = 1.0;
  double inner_tol = 1e-12;
  int max_inner = 100;
  /// Optional merit evaluated on the running weighted average.
  std::function<double(const Point&)> merit;
  /// Log-spaced merit sampling density in t (0 means every sample).
  int merit_per_decade = 50;

  void validate() const;
};

inline constexpr double kFlowResidueFloor = 1e-14;

struct TrajectoryRecord {
  double t = 0.0;
  Point x;
  Point v;
  Point s;
  double lambda = 1.0;
  double residue = 0.0;
  /// E(t) = |s(t)|^2
  double lyapunov = 0.0;
  /// |F(x)|^{(1-p)/p}
  double weight = 1.0;
  /// Trapezoid integrals of the weight and of weight * x since t = 0.
  double weight_integral = 0.0;
  Point weighted_x_integral;
  /// Weighted running average of x over [0, t] (x(0) at t = 0).
  Point ergodic;
  /// |F(x(t))| - |F(x(0))| e^{-pt/(p-1)}; NaN for p = 1.
  double lower_bound_margin = std::numeric_limits<double>::quiet_NaN();
  /// |F(x) + |x - v|^{p-1}(x - v)|
  double algebraic_residual = 0.0;
  /// NaN where not sampled.
  double merit = std::numeric_limits<double>::quiet_NaN();
};

/// Solves F(x) + |x - v|^{p-1}(x - v) = 0 by damped Newton from warm_start.
Point implicit_state_solve(const Point& v, int order, const Problem& problem, double inner_tol,
                           const Point& warm_start, int max_inner = 100);

/// State at t = 0: v = x_0, s = 0, x the algebraic solution at v.
/// Throws ArgumentError when F(x_0) = 0.
TrajectoryRecord initial_flow_record(const FlowConfig& config, const Problem& problem,
                                     const Point& x0);

/// Advances by dt (defaults to config.step): x from the implicit solve at v,
/// then v <- v + dt (x - v) and the algebraic solve at the new v.
TrajectoryRecord flow_step(const TrajectoryRecord& state, const FlowConfig& config,
                           const Problem& problem, const Point& x0, double dt = -1.0,
                           double initial_residue = 0.0);

struct FlowDiagnostics {
  /// Steps where |F(x)| grew by more than 1e-8 relative to the previous sample
  /// and by more than the rounding level below.
  std::size_t monotonicity_violations = 0;
  /// Increases above the relative slack but within the rounding level of
  /// evaluating F, 16 eps (|DF(x)| |x| + |F(x)|); not counted as violations.
  std::size_t rounding_level_increases = 0;
  /// Largest relative one-step increase of |F(x)| (<= 0 when nonincreasing).
  double max_relative_increase = -std::numeric_limits<double>::infinity();
  /// min over samples of lower_bound_margin / |F(x(0))| (p >= 2 only).
  double min_relative_lower_bound_margin = std::numeric_limits<double>::infinity();
  bool lower_bound_checked = false;
  /// max |lambda |x - v|^{p-1} - 1|
  double max_lambda_defect = 0.0;
  /// max of |lambda |x-v|^{p-1} - 1| - (p-1) |G| / |F(x)|, where G is the
  /// algebraic residual; the subtracted part is what the inexact solve allows.
  double max_lambda_excess = -std::numeric_limits<double>::infinity();
  /// max | |x - v| - |F(x)|^{1/p} |
  double max_step_identity_defect = 0.0;
  /// max |s - (v - x_0)|
  double max_dual_defect = 0.0;
  double max_algebraic_residual = 0.0;
  /// min over t > 0 of (D^2/(8t))^{p/2} - |F(x(t))| with D = |x_0 - x*|.
  double min_residue_envelope_margin = std::numeric_limits<double>::infinity();
  bool underflow = false;
  double t_end = 0.0;
};

struct FlowResult {
  std::vector<TrajectoryRecord> records;
  FlowDiagnostics diagnostics;
};

FlowResult run_flow(const FlowConfig& config, const Problem& problem, const Point& x0);

struct SelfConvergenceReport {
  double step = 0.0;
  /// |x_h(t_max) - x_{h/2}(t_max)|
  double diff_half = 0.0;
  /// |x_{h/2}(t_max) - x_{h/4}(t_max)|
  double diff_quarter = 0.0;
  /// diff_half / h
  double constant = 0.0;
  /// log2(diff_half / diff_quarter); ~1 for a first-order scheme.
  double observed_order = 0.0;
};

SelfConvergenceReport self_convergence(const FlowConfig& config, const Problem& problem,
                                       const Point& x0);

}  // namespace medex
