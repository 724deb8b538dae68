#include "medex/flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/LU>

#include "medex/errors.hpp"
#include "medex/schedule.hpp"

namespace medex {
namespace {

Point algebraic_map(const Problem& problem, const Point& x, const Point& v, int order, Point* fx) {
  Point f = problem.eval(x);
  const Point h = x - v;
  Point g = f + std::pow(h.norm(), order - 1) * h;
  if (fx) *fx = std::move(f);
  return g;
}

// Fills the derived quantities of a record from (t, x, v).
void complete_record(TrajectoryRecord& rec, const Point& x0, int order, const Point& fx) {
  rec.s = rec.v - x0;
  rec.residue = fx.norm();
  rec.lyapunov = rec.s.squaredNorm();
  const double inv_p = 1.0 / order;
  rec.lambda = order == 1 ? 1.0 : std::pow(rec.residue, inv_p - 1.0);
  rec.weight = order == 1 ? 1.0 : std::pow(rec.residue, (1.0 - order) * inv_p);
  const Point h = rec.x - rec.v;
  rec.algebraic_residual = (fx + std::pow(h.norm(), order - 1) * h).norm();
}

}  // namespace

void FlowConfig::validate() const {
  if (order < 1) throw ArgumentError("order must be at least 1");
  if (!(step > 0.0) || step > 0.1) throw ArgumentError("flow step must lie in (0, 0.1]");
  if (!(t_max >= 0.0)) throw ArgumentError("t_max must be nonnegative");
  if (!(inner_tol > 0.0)) throw ArgumentError("inner_tol must be positive");
  if (max_inner < 1) throw ArgumentError("max_inner must be positive");
}

Point implicit_state_solve(const Point& v, int order, const Problem& problem, double inner_tol,
                           const Point& warm_start, int max_inner) {
  check_point(problem, v);
  check_point(problem, warm_start);
  const double target = inner_tol * (1.0 + problem.eval(v).norm());

  Point x = warm_start;
  Point fx;
  Point g = algebraic_map(problem, x, v, order, &fx);
  double gn = g.norm();
  Point best = x;
  double best_gn = gn;

  for (int it = 0; it < max_inner; ++it) {
    // Past the contract tolerance keep polishing until the defect is small
    // relative to |F(x)| itself; quadratic convergence makes this cheap.
    if (gn <= target && gn <= inner_tol * fx.norm()) break;
    if (gn == 0.0) break;

    Matrix jac = best_jacobian(problem, x);
    const Point h = x - v;
    const double hn = h.norm();
    const int q = order - 1;
    if (q == 0) {
      jac.diagonal().array() += 1.0;
    } else if (hn > 0.0) {
      jac.diagonal().array() += std::pow(hn, q);
      jac += q * std::pow(hn, q - 2) * h * h.transpose();
    }
    Point dx = -Eigen::PartialPivLU<Matrix>(jac).solve(g);
    if (!dx.allFinite()) {
      jac.diagonal().array() += 1e-8 * (1.0 + jac.norm());
      dx = -Eigen::PartialPivLU<Matrix>(jac).solve(g);
      if (!dx.allFinite()) dx = -g;
    }

    bool accepted = false;
    for (double t = 1.0; t >= 0x1.0p-30; t *= 0.5) {
      const Point xt = x + t * dx;
      Point ft;
      const Point gt = algebraic_map(problem, xt, v, order, &ft);
      const double gtn = gt.norm();
      if (gtn < (1.0 - 1e-4 * t) * gn) {
        x = xt;
        fx = std::move(ft);
        g = gt;
        gn = gtn;
        accepted = true;
        break;
      }
    }
    if (gn < best_gn) {
      best = x;
      best_gn = gn;
    }
    if (!accepted) break;
  }
  if (best_gn > target) {
    throw NoConvergenceError("implicit state solve diverged (residual " + std::to_string(best_gn) +
                                 ")",
                             best, best_gn);
  }
  return best;
}

TrajectoryRecord initial_flow_record(const FlowConfig& config, const Problem& problem,
                                     const Point& x0) {
  config.validate();
  check_point(problem, x0);
  if (problem.eval(x0).norm() == 0.0) {
    throw ArgumentError("flow start must satisfy F(x0) != 0");
  }
  TrajectoryRecord rec;
  rec.t = 0.0;
  rec.v = x0;
  rec.x = implicit_state_solve(x0, config.order, problem, config.inner_tol, x0, config.max_inner);
  const Point fx = problem.eval(rec.x);
  complete_record(rec, x0, config.order, fx);
  rec.weighted_x_integral = Point::Zero(x0.size());
  rec.ergodic = rec.x;
  rec.lower_bound_margin = config.order >= 2 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return rec;
}

TrajectoryRecord flow_step(const TrajectoryRecord& state, const FlowConfig& config,
                           const Problem& problem, const Point& x0, double dt,
                           double initial_residue) {
  if (dt <= 0.0) dt = config.step;
  TrajectoryRecord rec;
  rec.t = state.t + dt;
  rec.v = state.v + dt * (state.x - state.v);
  rec.x = implicit_state_solve(rec.v, config.order, problem, config.inner_tol, state.x,
                               config.max_inner);
  const Point fx = problem.eval(rec.x);
  complete_record(rec, x0, config.order, fx);

  rec.weight_integral = state.weight_integral + 0.5 * dt * (state.weight + rec.weight);
  rec.weighted_x_integral =
      state.weighted_x_integral + 0.5 * dt * (state.weight * state.x + rec.weight * rec.x);
  rec.ergodic = rec.weighted_x_integral / rec.weight_integral;
  if (config.order >= 2) {
    const double p = config.order;
    rec.lower_bound_margin = rec.residue - initial_residue * std::exp(-p * rec.t / (p - 1.0));
  }
  return rec;
}

FlowResult run_flow(const FlowConfig& config, const Problem& problem, const Point& x0) {
  FlowResult result;
  auto& diag = result.diagnostics;
  TrajectoryRecord rec = initial_flow_record(config, problem, x0);
  const double res0 = rec.residue;
  const int p = config.order;
  LogSchedule merit_schedule(config.merit_per_decade, 0.0, 1e-2);
  const std::optional<double> dist =
      problem.solution ? std::optional<double>((x0 - *problem.solution).norm()) : std::nullopt;

  auto observe = [&](TrajectoryRecord& r, const TrajectoryRecord* prev, bool last) {
    const double hn = (r.x - r.v).norm();
    const double lambda_defect = std::abs(r.lambda * std::pow(hn, p - 1) - 1.0);
    diag.max_lambda_defect = std::max(diag.max_lambda_defect, lambda_defect);
    diag.max_lambda_excess =
        std::max(diag.max_lambda_excess,
                 lambda_defect - (p - 1) * r.algebraic_residual / r.residue);
    diag.max_step_identity_defect = std::max(
        diag.max_step_identity_defect, std::abs(hn - std::pow(r.residue, 1.0 / p)));
    diag.max_dual_defect = std::max(diag.max_dual_defect, (r.s - (r.v - x0)).norm());
    diag.max_algebraic_residual = std::max(diag.max_algebraic_residual, r.algebraic_residual);
    if (p >= 2) {
      diag.lower_bound_checked = true;
      diag.min_relative_lower_bound_margin =
          std::min(diag.min_relative_lower_bound_margin, r.lower_bound_margin / res0);
    }
    if (prev) {
      const double rel = (r.residue - prev->residue) / prev->residue;
      diag.max_relative_increase = std::max(diag.max_relative_increase, rel);
      if (rel > 1e-8) {
        const double rounding = 16.0 * std::numeric_limits<double>::epsilon() *
                                (operator_norm(best_jacobian(problem, r.x)) * r.x.norm() +
                                 r.residue);
        if (r.residue - prev->residue <= 1e-8 * prev->residue + rounding) {
          ++diag.rounding_level_increases;
        } else {
          ++diag.monotonicity_violations;
        }
      }
      if (dist) {
        const double env = std::pow(*dist * *dist / (8.0 * r.t), 0.5 * p);
        diag.min_residue_envelope_margin =
            std::min(diag.min_residue_envelope_margin, env - r.residue);
      }
    }
    if (config.merit && (last || (r.t > 0.0 && merit_schedule(r.t)))) {
      r.merit = config.merit(r.ergodic);
    }
  };

  const std::size_t steps =
      config.t_max > 0.0
          ? static_cast<std::size_t>(std::ceil(config.t_max / config.step - 1e-9))
          : 0;
  observe(rec, nullptr, steps == 0);
  result.records.reserve(steps + 1);
  result.records.push_back(rec);

  for (std::size_t n = 0; n < steps; ++n) {
    const TrajectoryRecord& prev = result.records.back();
    if (prev.residue < kFlowResidueFloor) {
      diag.underflow = true;
      break;
    }
    const double t_next = std::min(config.t_max, static_cast<double>(n + 1) * config.step);
    TrajectoryRecord next = flow_step(prev, config, problem, x0, t_next - prev.t, res0);
    next.t = t_next;
    const bool last = n + 1 == steps || next.residue < kFlowResidueFloor;
    observe(next, &prev, last);
    result.records.push_back(std::move(next));
  }
  diag.t_end = result.records.back().t;
  return result;
}

SelfConvergenceReport self_convergence(const FlowConfig& config, const Problem& problem,
                                       const Point& x0) {
  FlowConfig cfg = config;
  cfg.merit = nullptr;
  auto endpoint = [&](double h) {
    cfg.step = h;
    return run_flow(cfg, problem, x0).records.back().x;
  };
  const Point a = endpoint(config.step);
  const Point b = endpoint(config.step / 2.0);
  const Point c = endpoint(config.step / 4.0);
  SelfConvergenceReport out;
  out.step = config.step;
  out.diff_half = (a - b).norm();
  out.diff_quarter = (b - c).norm();
  out.constant = out.diff_half / config.step;
  out.observed_order =
      out.diff_quarter > 0.0 ? std::log2(out.diff_half / out.diff_quarter) : 0.0;
  return out;
}

}  // namespace medex
