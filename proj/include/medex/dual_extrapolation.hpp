#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "medex/operator.hpp"

namespace medex {

/// Configuration of the p-th order dual extrapolation loop.
///
/// Each step picks lambda so that lambda * L * |x - v|^{p-1} / p! equals
/// `lambda_fraction`, which must lie in [1/(12p-6), 1/(4p+2)].
struct SolverConfig {
  int order = 1;
  double lipschitz = 1.0;
  std::size_t max_iters = 1000;
  /// Stop once |F(x_k)| <= residue_stop (0 disables).
  double residue_stop = 0.0;
  /// Defaults to the upper edge 1/(4p+2).
  std::optional<double> lambda_fraction;
  double tol_sub = 1e-10;

  double fraction() const;
  static double fraction_lower(int order);
  static double fraction_upper(int order);
  /// Throws ArgumentError on invalid order, L, or fraction.
  void validate() const;
};

struct IterateRecord {
  std::size_t k = 0;
  Point x;  // x_k
  Point v;  // v_k = x_0 + s_{k-1}
  Point s;  // s_k
  Point fx;  // F(x_k)
  double lambda = 0.0;
  double residue = 0.0;
  double step_norm = 0.0;
  /// E_k = |s_k|^2 / 2
  double lyapunov = 0.0;
  /// sum_{i<=k} lambda_i
  double cum_lambda = 0.0;
  double model_residual = 0.0;
};

enum class Termination { budget, residue_stop, exact_zero };
std::string to_string(Termination t);

struct RunResult {
  Point x0;
  std::vector<IterateRecord> records;
  /// lambda-weighted average of x_1..x_T; x_0 when no step was taken.
  Point ergodic;
  /// Last iterate, or the center v at which F vanished on exact_zero.
  Point last;
  Termination termination = Termination::budget;
};

/// lambda = c_p * p! / (L * step_norm^{p-1}).
double select_lambda(const SolverConfig& config, double step_norm);

/// Loop state (x_0, s_k, k).
struct DEState {
  Point x0;
  Point s;
  std::size_t k = 0;
};

struct StepOutcome {
  /// Present unless the center turned out to be a zero of F.
  std::optional<IterateRecord> record;
  /// Set on exact_zero: the center v_{k+1}.
  std::optional<Point> zero;
};

/// One iteration: v = x_0 + s_k, Taylor step at v, lambda, dual update.
/// `state` advances to (x_0, s_{k+1}, k+1) unless the step hits an exact zero.
StepOutcome de_step(DEState& state, const SolverConfig& config, const Problem& problem,
                    double cum_lambda = 0.0);

RunResult run_de(const SolverConfig& config, const Problem& problem, const Point& x0);

/// lambda-weighted average of x_1..x_T recomputed from records.
Point ergodic_average(const std::vector<IterateRecord>& records, std::size_t upto);

struct Certificate {
  std::string name;
  /// Smallest RHS - LHS over prefixes (positive means satisfied).
  double min_margin = 0.0;
  /// Prefix length T' attaining min_margin.
  std::size_t worst_prefix = 0;
  /// Magnitude the tolerance is relative to.
  double scale = 0.0;
  /// Margins down to -tolerance * scale are accepted.
  double tolerance = 0.0;
  bool passed = true;
  /// Informational certificates are reported but never fail a run.
  bool informational = false;
};

struct CertificateReport {
  std::vector<Certificate> items;
  bool passed() const;
  const Certificate* find(const std::string& name) const;
};

/// Relative slack on certificate margins.
inline constexpr double kCertificateTolerance = 1e-9;

/// Discrete Lyapunov certificates at every prefix T' of the run:
///   descent(x):  sum lambda_k <F(x_k), x_k - x> <= E_0 - E_T + <s_T, x - x_0>
///                - (1/24) sum |x_k - v_k|^2            (also reported with 1/10)
///   young(x):    sum lambda_k <F(x_k), x_k - x> <= |x - x_0|^2 / 2
///   steps:       sum |x_k - v_k|^2 <= 12 |x* - x_0|^2
///   lambda_sum:  sum lambda_k >= p!/((12p-6)L) (12|x*-x_0|^2)^{-(p-1)/2} T^{(p+1)/2}
///   residue_envelope: min_{i<=k} |F(x_i)| <= ((2p+1)L/p!) (12|x*-x_0|^2/k)^{p/2}
///   bracket:     lambda_k L |x_k - v_k|^{p-1} / p! within [1/(12p-6), 1/(4p+2)]
/// Certificates referring to x* are evaluated when the problem knows it; the
/// descent and young inequalities are also evaluated at x*.
CertificateReport run_certificates(const RunResult& result, const Problem& problem,
                                     const SolverConfig& config, const Point& probe);

}  // namespace medex
