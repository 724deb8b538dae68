#include "medex/dual_extrapolation.hpp"

#include <cmath>
#include <string>

#include "medex/errors.hpp"
#include "medex/taylor_model.hpp"

namespace medex {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double SolverConfig::fraction_lower(int order) { return 1.0 / (12.0 * order - 6.0); }
double SolverConfig::fraction_upper(int order) { return 1.0 / (4.0 * order + 2.0); }

double SolverConfig::fraction() const {
  return lambda_fraction.value_or(fraction_upper(order));
}

void SolverConfig::validate() const {
  if (order < 1) throw ArgumentError("order must be at least 1");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw ArgumentError("Lipschitz constant must be positive and finite");
  }
  if (!(residue_stop >= 0.0)) throw ArgumentError("residue_stop must be nonnegative");
  if (!(tol_sub > 0.0)) throw ArgumentError("tol_sub must be positive");
  const double c = fraction();
  // the p = 1 bracket is the single point 1/6; allow for its rounding
  const double lo = fraction_lower(order) * (1.0 - 1e-15);
  const double hi = fraction_upper(order) * (1.0 + 1e-15);
  if (!(c >= lo && c <= hi)) {
    throw ArgumentError("lambda fraction " + std::to_string(c) + " outside [1/(12p-6), 1/(4p+2)]");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::budget:
      return "budget";
    case Termination::residue_stop:
      return "residue_stop";
    case Termination::exact_zero:
      return "exact_zero";
  }
  return "unknown";
}

double select_lambda(const SolverConfig& config, double step_norm) {
  if (!(step_norm > 0.0)) throw ArgumentError("select_lambda needs a positive step norm");
  return config.fraction() * factorial(config.order) /
         (config.lipschitz * std::pow(step_norm, config.order - 1));
}

StepOutcome de_step(DEState& state, const SolverConfig& config, const Problem& problem,
                    double cum_lambda) {
  const std::size_t k = state.k + 1;
  StepOutcome out;
  Point v = state.x0 + state.s;
  if (!v.allFinite()) throw IterationError("extrapolated point is not finite", k);

  StepSolution step;
  try {
    const TaylorModel model = TaylorModel::build(problem, v, config.order, config.lipschitz);
    if (model.value().norm() == 0.0) {
      out.zero = std::move(v);
      return out;
    }
    step = solve_step(model, config.tol_sub);
  } catch (const Error& e) {
    throw IterationError(std::string("subproblem failed: ") + e.what(), k);
  }

  if (step.step_norm < 1e-15 * (1.0 + v.norm())) {
    out.zero = std::move(v);
    return out;
  }

  IterateRecord rec;
  rec.k = k;
  rec.lambda = select_lambda(config, step.step_norm);
  rec.fx = problem.eval(step.x);
  rec.s = state.s - rec.lambda * rec.fx;
  rec.x = std::move(step.x);
  rec.v = std::move(v);
  rec.residue = rec.fx.norm();
  rec.step_norm = step.step_norm;
  rec.lyapunov = 0.5 * rec.s.squaredNorm();
  rec.cum_lambda = cum_lambda + rec.lambda;
  rec.model_residual = step.model_residual;

  state.s = rec.s;
  state.k = k;
  out.record = std::move(rec);
  return out;
}

RunResult run_de(const SolverConfig& config, const Problem& problem, const Point& x0) {
  config.validate();
  check_point(problem, x0);

  RunResult result;
  result.x0 = x0;
  result.ergodic = x0;
  result.last = x0;
  result.records.reserve(config.max_iters);
  if (problem.eval(x0).norm() == 0.0) {
    result.termination = config.max_iters == 0 ? Termination::budget : Termination::exact_zero;
    return result;
  }

  DEState state{x0, Point::Zero(x0.size()), 0};
  Point weighted_sum = Point::Zero(x0.size());
  double cum_lambda = 0.0;
  result.termination = Termination::budget;

  while (state.k < config.max_iters) {
    StepOutcome step = de_step(state, config, problem, cum_lambda);
    if (step.zero) {
      result.last = *step.zero;
      result.termination = Termination::exact_zero;
      break;
    }
    IterateRecord& rec = *step.record;
    cum_lambda = rec.cum_lambda;
    weighted_sum += rec.lambda * rec.x;
    result.ergodic = weighted_sum / cum_lambda;
    result.last = rec.x;
    const double res = rec.residue;
    result.records.push_back(std::move(rec));
    if (res == 0.0) {
      result.termination = Termination::exact_zero;
      break;
    }
    if (config.residue_stop > 0.0 && res <= config.residue_stop) {
      result.termination = Termination::residue_stop;
      break;
    }
  }
  return result;
}

Point ergodic_average(const std::vector<IterateRecord>& records, std::size_t upto) {
  if (records.empty() || upto == 0) throw ArgumentError("ergodic average of an empty prefix");
  upto = std::min(upto, records.size());
  Point sum = Point::Zero(records.front().x.size());
  double weight = 0.0;
  for (std::size_t i = 0; i < upto; ++i) {
    sum += records[i].lambda * records[i].x;
    weight += records[i].lambda;
  }
  return sum / weight;
}

}  // namespace medex
