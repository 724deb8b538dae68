#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "medex/dual_extrapolation.hpp"

namespace medex {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Accumulates min margin and its prefix; pass rule is margin >= -tol * scale.
struct MarginTracker {
  Certificate cert;

  MarginTracker(std::string name, double tolerance, bool informational = false) {
    cert.name = std::move(name);
    cert.min_margin = std::numeric_limits<double>::infinity();
    cert.tolerance = tolerance;
    cert.informational = informational;
  }

  void add(std::size_t prefix, double margin, double scale) {
    cert.scale = std::max(cert.scale, scale);
    if (margin < cert.min_margin) {
      cert.min_margin = margin;
      cert.worst_prefix = prefix;
    }
  }

  Certificate finish() {
    if (!std::isfinite(cert.min_margin) && cert.min_margin > 0) cert.min_margin = 0.0;
    cert.passed = cert.min_margin >= -cert.tolerance * cert.scale;
    return cert;
  }
};

// sum lambda_k <F(x_k), x_k - x> against the descent and Young bounds.
void descent_certificates(const RunResult& result, const Point& x, const std::string& tag,
                          CertificateReport& report) {
  MarginTracker descent("descent@" + tag, kCertificateTolerance);
  MarginTracker stated("descent_stated@" + tag, kCertificateTolerance, true);
  MarginTracker young("young@" + tag, kCertificateTolerance);

  const Point& x0 = result.x0;
  const double half_dist2 = 0.5 * (x - x0).squaredNorm();
  double lhs = 0.0;
  double lhs_abs = 0.0;
  double steps2 = 0.0;
  for (const IterateRecord& rec : result.records) {
    const double term = rec.lambda * rec.fx.dot(rec.x - x);
    lhs += term;
    lhs_abs += std::abs(term);
    steps2 += rec.step_norm * rec.step_norm;

    const double dual = rec.s.dot(x - x0);
    const double base = -rec.lyapunov + dual;  // E_0 = 0
    const double scale = 1.0 + lhs_abs + rec.lyapunov + std::abs(dual) + steps2;
    descent.add(rec.k, base - steps2 / 24.0 - lhs, scale);
    stated.add(rec.k, base - steps2 / 10.0 - lhs, scale);
    young.add(rec.k, half_dist2 - lhs, 1.0 + lhs_abs + half_dist2);
  }
  report.items.push_back(descent.finish());
  report.items.push_back(stated.finish());
  report.items.push_back(young.finish());
}

}  // namespace

bool CertificateReport::passed() const {
  return std::all_of(items.begin(), items.end(),
                     [](const Certificate& c) { return c.informational || c.passed; });
}

const Certificate* CertificateReport::find(const std::string& name) const {
  for (const auto& c : items)
    if (c.name == name) return &c;
  return nullptr;
}

CertificateReport run_certificates(const RunResult& result, const Problem& problem,
                                     const SolverConfig& config, const Point& probe) {
  CertificateReport report;
  if (result.records.empty()) return report;
  check_point(problem, probe);

  const int p = config.order;
  const double L = config.lipschitz;
  const double pf = factorial(p);

  {
    MarginTracker bracket("bracket", 1e-12);
    const double lo = SolverConfig::fraction_lower(p);
    const double hi = SolverConfig::fraction_upper(p);
    for (const IterateRecord& rec : result.records) {
      const double value = rec.lambda * L * std::pow(rec.step_norm, p - 1) / pf;
      bracket.add(rec.k, std::min(value - lo, hi - value), hi);
    }
    report.items.push_back(bracket.finish());
  }

  descent_certificates(result, probe, "probe", report);

  if (problem.solution) {
    const Point& xs = *problem.solution;
    descent_certificates(result, xs, "solution", report);

    const double dist2 = (xs - result.x0).squaredNorm();
    MarginTracker steps("steps", kCertificateTolerance);
    MarginTracker lambda_sum("lambda_sum", kCertificateTolerance);
    MarginTracker envelope("residue_envelope", kCertificateTolerance);
    const double lambda_coef =
        pf / ((12.0 * p - 6.0) * L) * std::pow(1.0 / (12.0 * dist2), 0.5 * (p - 1));
    const double residue_coef = (2.0 * p + 1.0) * L / pf;

    double steps2 = 0.0;
    double inf_res = std::numeric_limits<double>::infinity();
    for (const IterateRecord& rec : result.records) {
      const double T = static_cast<double>(rec.k);
      steps2 += rec.step_norm * rec.step_norm;
      steps.add(rec.k, 12.0 * dist2 - steps2, 1.0 + 12.0 * dist2 + steps2);

      const double lower = lambda_coef * std::pow(T, 0.5 * (p + 1));
      lambda_sum.add(rec.k, rec.cum_lambda - lower, 1.0 + rec.cum_lambda);

      inf_res = std::min(inf_res, rec.residue);
      const double bound = residue_coef * std::pow(12.0 * dist2 / T, 0.5 * p);
      envelope.add(rec.k, bound - inf_res, 1.0 + inf_res);
    }
    report.items.push_back(steps.finish());
    report.items.push_back(lambda_sum.finish());
    report.items.push_back(envelope.finish());
  }
  return report;
}

}  // namespace medex
