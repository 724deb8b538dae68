#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medex/csv.hpp"
#include "medex/dual_extrapolation.hpp"
#include "medex/flow.hpp"
#include "medex/operator.hpp"
#include "medex/restart.hpp"

namespace medex {

enum class SolverKind { de, restart, flow };
std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

/// Everything that determines an experiment's output. Identical specs give
/// byte-identical CSV files.
struct ExperimentSpec {
  SolverKind solver = SolverKind::de;
  ProblemDescriptor problem;
  int order = 1;
  /// Defaults to the problem's declared constant.
  std::optional<double> lipschitz;

  // dual extrapolation (also the inner step of restart)
  std::size_t iters = 1000;
  double residue_stop = 0.0;
  std::optional<double> lambda_fraction;
  double tol_sub = 1e-10;

  // restart
  std::size_t outer = 10;
  double stop_residue = 0.0;

  // flow
  double step = 1e-3;
  double t_max = 1.0;
  double inner_tol = 1e-12;

  /// Start x* + x0_dist * u for a seeded unit vector u, unless x0 is given.
  double x0_dist = 1.0;
  std::optional<Point> x0;
  std::uint64_t seed = 0;

  bool merit = false;
  /// Merit radius D; defaults to 2 |x0 - x*|.
  std::optional<double> merit_radius;
  int merit_per_decade = 50;
  /// Starts for the sampled lower bound on non-affine problems.
  int merit_starts = 16;

  /// CSV path; nothing is written when empty.
  std::string out;
};

/// key = value settings, as read from a config file or collected from flags.
using Settings = std::map<std::string, std::string>;

/// Plain text, one `key = value` per line, `#` starts a comment. Throws
/// ConfigurationError on malformed lines and repeated keys.
Settings parse_settings(std::istream& in);
Settings read_settings_file(const std::string& path);
/// Throws ConfigurationError on unknown keys or unparsable values.
void apply_settings(ExperimentSpec& spec, const Settings& settings);
/// Config-file entries overridden by command-line entries.
Settings merge_settings(Settings file, const Settings& overrides);
/// Keys accepted by apply_settings.
const std::vector<std::string>& settings_keys();

/// Canonical text of every field; its FNV-1a hash names batch outputs.
std::string canonical_text(const ExperimentSpec& spec);
std::uint64_t spec_hash(const ExperimentSpec& spec);
std::string spec_hash_hex(const ExperimentSpec& spec);

struct CertificateLine {
  std::string name;
  bool passed = true;
  bool informational = false;
  /// Smallest margin (positive means satisfied), when meaningful.
  double margin = 0.0;
  std::string detail;
};

struct ExperimentSummary {
  SolverKind solver = SolverKind::de;
  std::string problem;
  int dim = 0;
  int order = 1;
  std::string hash;
  std::string termination;
  double final_residue = 0.0;
  std::size_t rows = 0;
  std::vector<CertificateLine> certificates;
  /// Set when the merit column holds sampled lower bounds.
  bool merit_is_lower_bound = false;
  /// Solver failure message.
  std::optional<std::string> error;

  /// No error and every non-informational certificate passed.
  bool passed() const;
};

struct ExperimentOutput {
  Table table;
  ExperimentSummary summary;
};

Problem build_problem(const ExperimentSpec& spec);
Point start_point(const ExperimentSpec& spec, const Problem& problem);
SolverConfig solver_config(const ExperimentSpec& spec, const Problem& problem);
RestartConfig restart_config(const ExperimentSpec& spec, const Problem& problem);
FlowConfig flow_config(const ExperimentSpec& spec);

struct MeritEvaluator {
  std::function<double(const Point&)> eval;
  /// False when eval returns sampled lower bounds.
  bool exact = false;
  double radius = 0.0;
};

/// Exact merit on affine problems, seeded sampled lower bound otherwise.
MeritEvaluator make_merit(const ExperimentSpec& spec, const Problem& problem, const Point& x0);

/// Column names for a solver's CSV.
std::vector<std::string> csv_schema(SolverKind kind);

/// Runs the solver, evaluates certificates and writes spec.out when set.
/// Solver errors are reported in the summary; invalid specs throw.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

void print_summary(const ExperimentSummary& summary, std::ostream& out);

struct BatchEntry {
  ExperimentSpec spec;
  ExperimentSummary summary;
  std::string file;
};

/// Runs independent experiments on up to `jobs` threads. Each writes
/// <out_dir>/<hash>.csv; index.csv is written afterwards in input order.
std::vector<BatchEntry> run_batch(std::vector<ExperimentSpec> specs, const std::string& out_dir,
                                  unsigned jobs);

/// Batch file: one experiment per line, `solver key=value ...`, `#` comments.
std::vector<ExperimentSpec> parse_batch(std::istream& in);

}  // namespace medex
