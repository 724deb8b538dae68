#include "medex/restart.hpp"

#include <cmath>
#include <limits>

#include "medex/errors.hpp"

namespace medex {

void RestartConfig::validate() const {
  inner.validate();
  if (inner.max_iters != 1) throw ArgumentError("restart inner solver must run exactly one step");
  if (!(mu > 0.0)) throw ArgumentError("mu must be positive");
  if (!(stop_residue >= 0.0)) throw ArgumentError("stop_residue must be nonnegative");
}

RestartTrace run_restart(const RestartConfig& config, const Problem& problem, const Point& x0) {
  config.validate();
  check_point(problem, x0);

  RestartTrace trace;
  auto push = [&](const Point& x, double res) {
    trace.points.push_back(x);
    trace.residues.push_back(res);
    if (problem.solution) trace.errors.push_back((x - *problem.solution).norm());
  };

  Point x = x0;
  double res = residue(problem, x);
  push(x, res);
  for (std::size_t k = 0; k < config.outer_iters; ++k) {
    if (res == 0.0) {
      trace.termination = Termination::exact_zero;
      return trace;
    }
    if (config.stop_residue > 0.0 && res <= config.stop_residue) {
      trace.termination = Termination::residue_stop;
      return trace;
    }
    RunResult inner;
    try {
      inner = run_de(config.inner, problem, x);
    } catch (const IterationError& e) {
      throw IterationError(std::string("restart inner step: ") + e.what(), k + 1);
    }
    if (inner.records.empty()) {
      // the step found F(x) = 0 numerically at the current point
      trace.termination = Termination::exact_zero;
      return trace;
    }
    x = inner.ergodic;
    res = residue(problem, x);
    push(x, res);
    if (inner.termination == Termination::exact_zero) {
      trace.termination = Termination::exact_zero;
      return trace;
    }
  }
  trace.termination = Termination::budget;
  return trace;
}

LocalRateCertificate local_rate_certificate(const RestartTrace& trace, int order, double lipschitz,
                                           double mu, double floor, double solution_norm) {
  if (order < 1) throw ArgumentError("order must be at least 1");
  if (!(lipschitz > 0.0) || !(mu > 0.0)) throw ArgumentError("L and mu must be positive");
  if (!trace.points.empty() && trace.errors.size() != trace.points.size()) {
    throw ArgumentError("certificate needs distances to a known solution");
  }
  if (floor < 0.0) floor = 1e-12 * (1.0 + solution_norm);

  double pf = 1.0;
  for (int i = 2; i <= order; ++i) pf *= i;
  const double kappa = lipschitz / mu;
  LocalRateCertificate cert;
  cert.constant = std::pow(4.0, order) * (2.0 * order + 1.0) * kappa / pf;
  cert.basin_radius = order >= 2 ? 0.5 * std::pow(1.0 / cert.constant, 1.0 / (order - 1))
                                 : std::numeric_limits<double>::infinity();
  cert.basin_satisfied = !trace.errors.empty() && trace.errors.front() <= cert.basin_radius;

  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k + 1 < trace.errors.size(); ++k) {
    const double ek = trace.errors[k];
    const double next = trace.errors[k + 1];
    const bool ok = next <= cert.constant * std::pow(ek, order) + 1e-12;
    cert.step_ok.push_back(ok);
    if (ek < floor) continue;
    if (!ok) cert.passed = false;
    if (next >= floor && ek < 1.0) {
      cert.valid_steps.push_back(k);
      const double a = std::log(ek);
      num += a * std::log(next);
      den += a * a;
    }
  }
  cert.order_estimate = den > 0.0 ? num / den : 0.0;
  return cert;
}

}  // namespace medex
