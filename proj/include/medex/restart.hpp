#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "medex/dual_extrapolation.hpp"
#include "medex/operator.hpp"

namespace medex {

struct RestartConfig {
  /// Inner solver; run for exactly one iteration from each restart point.
  SolverConfig inner;
  std::size_t outer_iters = 10;
  /// Strong monotonicity modulus; only used by certificates.
  double mu = 1.0;
  /// Stop once |F(x_k)| <= stop_residue (0 disables).
  double stop_residue = 0.0;

  void validate() const;
};

struct RestartTrace {
  std::vector<Point> points;
  /// |x_k - x*|; empty when the solution is unknown.
  std::vector<double> errors;
  std::vector<double> residues;
  Termination termination = Termination::budget;
};

/// Restarted dual extrapolation: x_{k+1} is the output of one inner iteration
/// started at x_k.
RestartTrace run_restart(const RestartConfig& config, const Problem& problem, const Point& x0);

struct LocalRateCertificate {
  /// 4^p (2p+1) kappa / p!
  double constant = 0.0;
  /// 0.5 * (p! / (4^p (2p+1) kappa))^{1/(p-1)}; infinite for p = 1.
  double basin_radius = 0.0;
  bool basin_satisfied = false;
  /// Per-step e_{k+1} <= constant * e_k^p + 1e-12; indexed by k.
  std::vector<bool> step_ok;
  /// Steps considered (both errors above the floor).
  std::vector<std::size_t> valid_steps;
  /// Least-squares fit of log e_{k+1} = q log e_k through the origin over valid steps.
  double order_estimate = 0.0;
  bool passed = true;
};

/// `floor` defaults to 1e-12 (1 + |x*|): steps starting below it are ignored.
LocalRateCertificate local_rate_certificate(const RestartTrace& trace, int order, double lipschitz,
                                           double mu, double floor = -1.0,
                                           double solution_norm = 0.0);

}  // namespace medex
