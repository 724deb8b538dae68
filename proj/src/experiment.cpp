#include "medex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "medex/errors.hpp"
#include "medex/merit.hpp"
#include "medex/random.hpp"
#include "medex/schedule.hpp"

namespace medex {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != last) {
    throw ConfigurationError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigurationError("'" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ConfigurationError("'" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw ConfigurationError("'" + key + "' expects true or false, got '" + text + "'");
}

Point parse_point(const std::string& key, const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) xs.push_back(parse_real(key, trim(item)));
  if (xs.empty()) throw ConfigurationError("'" + key + "' expects a comma-separated list");
  return Eigen::Map<Point>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

using Setter = void (*)(ExperimentSpec&, const std::string&, const std::string&);

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"solver", [](ExperimentSpec& s, const std::string&, const std::string& v) {
         s.solver = parse_solver_kind(v);
       }},
      {"problem", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         try {
           s.problem.kind = parse_problem_kind(v);
         } catch (const Error& e) {
           throw ConfigurationError("'" + k + "': " + e.what());
         }
       }},
      {"dim", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.problem.dim = static_cast<int>(parse_count(k, v));
       }},
      {"p", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.order = static_cast<int>(parse_integer(k, v));
       }},
      {"L", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.lipschitz = parse_real(k, v);
       }},
      {"iters", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.iters = parse_count(k, v);
       }},
      {"residue_stop", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.residue_stop = parse_real(k, v);
       }},
      {"lambda_fraction", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.lambda_fraction = parse_real(k, v);
       }},
      {"tol_sub", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.tol_sub = parse_real(k, v);
       }},
      {"outer", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.outer = parse_count(k, v);
       }},
      {"mu", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.problem.mu = parse_real(k, v);
       }},
      {"stop_residue", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.stop_residue = parse_real(k, v);
       }},
      {"h", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.step = parse_real(k, v);
       }},
      {"t_max", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.t_max = parse_real(k, v);
       }},
      {"inner_tol", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.inner_tol = parse_real(k, v);
       }},
      {"seed", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.seed = static_cast<std::uint64_t>(parse_count(k, v));
       }},
      {"x0_dist", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.x0_dist = parse_real(k, v);
       }},
      {"x0", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.x0 = parse_point(k, v);
       }},
      {"merit", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.merit = parse_bool(k, v);
       }},
      {"D", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.merit_radius = parse_real(k, v);
       }},
      {"merit_per_decade", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.merit_per_decade = static_cast<int>(parse_integer(k, v));
       }},
      {"merit_starts", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.merit_starts = static_cast<int>(parse_integer(k, v));
       }},
      {"out", [](ExperimentSpec& s, const std::string&, const std::string& v) { s.out = v; }},
      {"radius", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.problem.radius = parse_real(k, v);
       }},
      {"spectrum_decades", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.problem.spectrum_decades = parse_real(k, v);
       }},
      {"skew_scale", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.problem.skew_scale = parse_real(k, v);
       }},
      {"psd_scale", [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.problem.psd_scale = parse_real(k, v);
       }},
  };
  return table;
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("default");
}

CertificateLine from_certificate(const Certificate& c) {
  CertificateLine line;
  line.name = c.name;
  line.passed = c.passed;
  line.informational = c.informational;
  line.margin = c.min_margin;
  line.detail = "worst prefix " + std::to_string(c.worst_prefix);
  return line;
}

Cell real(double v) { return std::isfinite(v) ? Cell(v) : Cell(); }

void run_de_experiment(const ExperimentSpec& spec, const Problem& problem, const Point& x0,
                       ExperimentOutput& out) {
  const SolverConfig config = solver_config(spec, problem);
  config.validate();
  MeritEvaluator merit;
  if (spec.merit) merit = make_merit(spec, problem, x0);
  out.summary.merit_is_lower_bound = spec.merit && !merit.exact;

  RunResult result;
  try {
    result = run_de(config, problem, x0);
  } catch (const Error& e) {
    out.summary.error = e.what();
    return;
  }
  out.summary.termination = to_string(result.termination);
  out.summary.final_residue = residue(problem, result.last);

  const std::size_t T = result.records.size();
  LogSchedule schedule(spec.merit_per_decade);
  Point weighted = Point::Zero(x0.size());
  double inf_res = kInf;
  // merit(x~_k) <= D^2 / (2 sum lambda) follows from the Young bound and monotonicity.
  double bound_margin = kInf;
  std::size_t bound_prefix = 0;
  bool bound_ok = true;
  out.table.rows.reserve(T);
  for (std::size_t i = 0; i < T; ++i) {
    const IterateRecord& rec = result.records[i];
    weighted += rec.lambda * rec.x;
    inf_res = std::min(inf_res, rec.residue);
    double m = kNaN;
    if (merit.eval && (schedule(static_cast<double>(rec.k)) || i + 1 == T)) {
      m = merit.eval(weighted / rec.cum_lambda);
      if (merit.exact) {
        const double bound = merit.radius * merit.radius / (2.0 * rec.cum_lambda);
        const double margin = bound - m;
        if (margin < bound_margin) {
          bound_margin = margin;
          bound_prefix = rec.k;
        }
        if (margin < -(kCertificateTolerance * bound + 1e-10)) bound_ok = false;
      }
    }
    out.table.rows.push_back({Cell(static_cast<std::int64_t>(rec.k)), real(rec.lambda),
                              real(rec.residue), real(inf_res), real(rec.step_norm),
                              real(rec.lyapunov), real(rec.cum_lambda), real(m)});
  }

  Rng probe_rng(spec.seed + 2);
  const double probe_radius = problem.solution ? (x0 - *problem.solution).norm() + 1.0 : 1.0;
  const Point probe = probe_rng.in_ball(x0, probe_radius);
  for (const Certificate& c : run_certificates(result, problem, config, probe).items) {
    out.summary.certificates.push_back(from_certificate(c));
  }
  if (merit.exact && T > 0) {
    CertificateLine line;
    line.name = "merit_bound";
    line.passed = bound_ok;
    line.margin = bound_margin;
    line.detail = "worst prefix " + std::to_string(bound_prefix);
    out.summary.certificates.push_back(line);
  }
}

void run_restart_experiment(const ExperimentSpec& spec, const Problem& problem, const Point& x0,
                            ExperimentOutput& out) {
  const RestartConfig config = restart_config(spec, problem);
  config.validate();
  RestartTrace trace;
  try {
    trace = run_restart(config, problem, x0);
  } catch (const Error& e) {
    out.summary.error = e.what();
    return;
  }
  out.summary.termination = to_string(trace.termination);
  out.summary.final_residue = trace.residues.back();

  std::optional<LocalRateCertificate> cert;
  if (problem.solution) {
    cert = local_rate_certificate(trace, spec.order, config.inner.lipschitz, config.mu, -1.0,
                                 problem.solution->norm());
  }
  for (std::size_t k = 0; k < trace.points.size(); ++k) {
    Cell error;
    Cell margin;
    if (!trace.errors.empty()) {
      error = real(trace.errors[k]);
      if (k > 0) {
        margin = real(cert->constant * std::pow(trace.errors[k - 1], spec.order) + 1e-12 -
                      trace.errors[k]);
      }
    }
    out.table.rows.push_back(
        {Cell(static_cast<std::int64_t>(k)), error, real(trace.residues[k]), margin});
  }

  if (cert) {
    CertificateLine line;
    line.name = "local_rate";
    line.passed = cert->passed;
    line.margin = kInf;
    for (std::size_t k = 0; k < cert->step_ok.size(); ++k) {
      line.margin = std::min(line.margin, cert->constant * std::pow(trace.errors[k], spec.order) +
                                              1e-12 - trace.errors[k + 1]);
    }
    if (!std::isfinite(line.margin)) line.margin = 0.0;
    std::ostringstream detail;
    detail << "C=" << format_double(cert->constant)
           << " basin=" << format_double(cert->basin_radius)
           << " in_basin=" << (cert->basin_satisfied ? "yes" : "no")
           << " valid_steps=" << cert->valid_steps.size()
           << " order_estimate=" << format_double(cert->order_estimate);
    line.detail = detail.str();
    out.summary.certificates.push_back(line);
  }
}

void run_flow_experiment(const ExperimentSpec& spec, const Problem& problem, const Point& x0,
                         ExperimentOutput& out) {
  FlowConfig config = flow_config(spec);
  config.validate();
  MeritEvaluator merit;
  if (spec.merit) {
    merit = make_merit(spec, problem, x0);
    config.merit = merit.eval;
  }
  out.summary.merit_is_lower_bound = spec.merit && !merit.exact;

  FlowResult result;
  try {
    result = run_flow(config, problem, x0);
  } catch (const Error& e) {
    out.summary.error = e.what();
    return;
  }
  const FlowDiagnostics& diag = result.diagnostics;
  out.summary.termination = diag.underflow ? "residue_floor" : "t_max";
  out.summary.final_residue = result.records.back().residue;

  out.table.rows.reserve(result.records.size());
  for (const TrajectoryRecord& rec : result.records) {
    out.table.rows.push_back({real(rec.t), real(rec.residue), real(rec.lower_bound_margin),
                              real(rec.lyapunov), real(rec.lambda), real(rec.merit)});
  }

  const double res0 = result.records.front().residue;
  CertificateLine mono;
  mono.name = "residue_nonincreasing";
  mono.passed = diag.monotonicity_violations == 0;
  mono.margin = std::isfinite(diag.max_relative_increase) ? -diag.max_relative_increase : 0.0;
  mono.detail = std::to_string(diag.monotonicity_violations) + " violations, " +
                std::to_string(diag.rounding_level_increases) + " rounding-level increases";
  out.summary.certificates.push_back(mono);

  if (diag.lower_bound_checked) {
    CertificateLine lb;
    lb.name = "exponential_lower_bound";
    lb.margin = diag.min_relative_lower_bound_margin;
    lb.passed = lb.margin >= -1e-6;
    lb.detail = "relative to |F(x(0))| = " + format_double(res0);
    out.summary.certificates.push_back(lb);
  }

  CertificateLine lam;
  lam.name = "lambda_identity";
  lam.margin = 1e-8 - diag.max_lambda_excess;
  lam.passed = lam.margin >= 0.0;
  lam.detail = "max |lambda |x-v|^{p-1} - 1| = " + format_double(diag.max_lambda_defect) +
               " before the solve-induced slack";
  out.summary.certificates.push_back(lam);

  CertificateLine dual;
  dual.name = "dual_identity";
  dual.margin = -diag.max_dual_defect;
  dual.passed = diag.max_dual_defect == 0.0;
  dual.detail = "max |s - (v - x0)|";
  out.summary.certificates.push_back(dual);

  CertificateLine step;
  step.name = "step_identity";
  step.informational = true;
  step.margin = -diag.max_step_identity_defect;
  step.detail = "max ||x-v| - |F(x)|^{1/p}|";
  out.summary.certificates.push_back(step);

  CertificateLine alg;
  alg.name = "algebraic_residual";
  alg.informational = true;
  alg.margin = -diag.max_algebraic_residual;
  alg.detail = "max |F(x) + |x-v|^{p-1}(x-v)|";
  out.summary.certificates.push_back(alg);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::de:
      return "de";
    case SolverKind::restart:
      return "restart";
    case SolverKind::flow:
      return "flow";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "de" || name == "solve") return SolverKind::de;
  if (name == "restart") return SolverKind::restart;
  if (name == "flow") return SolverKind::flow;
  throw ConfigurationError("unknown solver '" + name + "' (expected de, restart or flow)");
}

Settings parse_settings(std::istream& in) {
  Settings out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigurationError("line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigurationError("line " + std::to_string(lineno) + ": '" + key +
                               "' is set twice");
    }
  }
  return out;
}

Settings read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file '" + path + "'");
  return parse_settings(in);
}

const std::vector<std::string>& settings_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

Settings merge_settings(Settings file, const Settings& overrides) {
  for (const auto& [k, v] : overrides) file[k] = v;
  return file;
}

void apply_settings(ExperimentSpec& spec, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    const auto& table = setters();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& entry) { return entry.first == key; });
    if (it == table.end()) throw ConfigurationError("unknown setting '" + key + "'");
    it->second(spec, key, value);
  }
}

std::string canonical_text(const ExperimentSpec& spec) {
  std::ostringstream os;
  const ProblemDescriptor& d = spec.problem;
  os << "solver=" << to_string(spec.solver) << ";problem=" << to_string(d.kind)
     << ";dim=" << d.dim << ";p=" << spec.order << ";seed=" << spec.seed
     << ";mu=" << format_double(d.mu) << ";skew_scale=" << format_double(d.skew_scale)
     << ";psd_scale=" << format_double(d.psd_scale)
     << ";spectrum_decades=" << format_double(d.spectrum_decades)
     << ";radius=" << format_double(d.radius) << ";L=" << optional_text(spec.lipschitz)
     << ";iters=" << spec.iters << ";residue_stop=" << format_double(spec.residue_stop)
     << ";lambda_fraction=" << optional_text(spec.lambda_fraction)
     << ";tol_sub=" << format_double(spec.tol_sub) << ";outer=" << spec.outer
     << ";stop_residue=" << format_double(spec.stop_residue) << ";h=" << format_double(spec.step)
     << ";t_max=" << format_double(spec.t_max) << ";inner_tol=" << format_double(spec.inner_tol)
     << ";x0_dist=" << format_double(spec.x0_dist) << ";x0=";
  if (spec.x0) {
    for (Eigen::Index i = 0; i < spec.x0->size(); ++i) {
      if (i) os << ',';
      os << format_double((*spec.x0)[i]);
    }
  } else {
    os << "default";
  }
  os << ";merit=" << (spec.merit ? 1 : 0) << ";D=" << optional_text(spec.merit_radius)
     << ";merit_per_decade=" << spec.merit_per_decade << ";merit_starts=" << spec.merit_starts;
  // explicit matrices and offsets only arise programmatically; hash their entries too
  if (d.matrix) {
    os << ";matrix=";
    for (Eigen::Index i = 0; i < d.matrix->size(); ++i) os << format_double(d.matrix->data()[i]) << ' ';
  }
  if (d.offset) {
    os << ";offset=";
    for (Eigen::Index i = 0; i < d.offset->size(); ++i) os << format_double((*d.offset)[i]) << ' ';
  }
  return os.str();
}

std::uint64_t spec_hash(const ExperimentSpec& spec) { return fnv1a(canonical_text(spec)); }

std::string spec_hash_hex(const ExperimentSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(spec_hash(spec)));
  return buf;
}

bool ExperimentSummary::passed() const {
  if (error) return false;
  return std::all_of(certificates.begin(), certificates.end(),
                     [](const CertificateLine& c) { return c.informational || c.passed; });
}

Problem build_problem(const ExperimentSpec& spec) {
  ProblemDescriptor d = spec.problem;
  d.order = spec.order;
  d.seed = spec.seed;
  return make_problem(d);
}

Point start_point(const ExperimentSpec& spec, const Problem& problem) {
  if (spec.x0) {
    if (spec.x0->size() != problem.dim) {
      throw ConfigurationError("x0 has " + std::to_string(spec.x0->size()) +
                               " entries, problem dimension is " + std::to_string(problem.dim));
    }
    return *spec.x0;
  }
  if (!(spec.x0_dist >= 0.0)) throw ConfigurationError("x0_dist must be nonnegative");
  Rng rng(spec.seed + 1);  // separate stream from the problem generator
  const Point center = problem.solution.value_or(Point::Zero(problem.dim));
  return center + spec.x0_dist * rng.unit_vector(problem.dim);
}

SolverConfig solver_config(const ExperimentSpec& spec, const Problem& problem) {
  SolverConfig c;
  c.order = spec.order;
  c.lipschitz = spec.lipschitz.value_or(problem.lipschitz);
  c.max_iters = spec.iters;
  c.residue_stop = spec.residue_stop;
  c.lambda_fraction = spec.lambda_fraction;
  c.tol_sub = spec.tol_sub;
  return c;
}

RestartConfig restart_config(const ExperimentSpec& spec, const Problem& problem) {
  RestartConfig c;
  c.inner = solver_config(spec, problem);
  c.inner.max_iters = 1;
  c.inner.residue_stop = 0.0;
  c.outer_iters = spec.outer;
  c.mu = problem.strong_monotonicity.value_or(spec.problem.mu);
  c.stop_residue = spec.stop_residue;
  return c;
}

FlowConfig flow_config(const ExperimentSpec& spec) {
  FlowConfig c;
  c.order = spec.order;
  c.step = spec.step;
  c.t_max = spec.t_max;
  c.inner_tol = spec.inner_tol;
  c.merit_per_decade = spec.merit_per_decade;
  return c;
}

MeritEvaluator make_merit(const ExperimentSpec& spec, const Problem& problem, const Point& x0) {
  const MeritSpec ms = MeritSpec::make(problem, x0, spec.merit_radius);
  MeritEvaluator out;
  out.radius = ms.radius;
  if (problem.affine) {
    out.exact = true;
    out.eval = [ms](const Point& x) { return merit_affine_exact(ms, x); };
  } else {
    const int starts = spec.merit_starts;
    const std::uint64_t seed = spec.seed + 3;
    out.eval = [ms, starts, seed](const Point& x) { return merit_sampled(ms, x, starts, seed).value; };
  }
  return out;
}

std::vector<std::string> csv_schema(SolverKind kind) {
  switch (kind) {
    case SolverKind::de:
      return {"k", "lambda", "residue", "inf_residue", "step_norm", "lyapunov", "cum_lambda",
              "merit_ergodic"};
    case SolverKind::restart:
      return {"k", "error", "residue", "cert_margin"};
    case SolverKind::flow:
      return {"t", "residue", "lower_bound_margin", "lyapunov", "lambda", "merit_ergodic"};
  }
  return {};
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  ExperimentOutput out;
  out.table.columns = csv_schema(spec.solver);
  out.summary.solver = spec.solver;
  out.summary.hash = spec_hash_hex(spec);
  out.summary.order = spec.order;

  const Problem problem = build_problem(spec);
  out.summary.problem = problem.name;
  out.summary.dim = problem.dim;
  const Point x0 = start_point(spec, problem);

  switch (spec.solver) {
    case SolverKind::de:
      run_de_experiment(spec, problem, x0, out);
      break;
    case SolverKind::restart:
      run_restart_experiment(spec, problem, x0, out);
      break;
    case SolverKind::flow:
      run_flow_experiment(spec, problem, x0, out);
      break;
  }
  if (out.summary.error) out.summary.termination = "error";
  out.summary.rows = out.table.rows.size();
  if (!spec.out.empty()) write_csv_file(out.table, spec.out);
  return out;
}

void print_summary(const ExperimentSummary& s, std::ostream& out) {
  out << "solver=" << to_string(s.solver) << " problem=" << s.problem << " dim=" << s.dim
      << " p=" << s.order << " termination=" << s.termination
      << " final_residue=" << format_double(s.final_residue) << " rows=" << s.rows
      << " spec=" << s.hash << '\n';
  if (s.error) out << "error: " << *s.error << '\n';
  if (s.merit_is_lower_bound) out << "note: merit_ergodic holds sampled lower bounds\n";
  for (const CertificateLine& c : s.certificates) {
    out << "certificate " << c.name << ' '
        << (c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL"))
        << " margin=" << format_double(c.margin + 0.0);
    if (!c.detail.empty()) out << " (" << c.detail << ')';
    out << '\n';
  }
  out << "verdict " << (s.passed() ? "PASS" : "FAIL") << '\n';
}

std::vector<ExperimentSpec> parse_batch(std::istream& in) {
  std::vector<ExperimentSpec> specs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string solver;
    if (!(words >> solver)) continue;
    ExperimentSpec spec;
    try {
      spec.solver = parse_solver_kind(solver);
      Settings settings;
      std::string item;
      while (words >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw ConfigurationError("expected key=value, got '" + item + "'");
        }
        settings[item.substr(0, eq)] = item.substr(eq + 1);
      }
      if (settings.count("solver")) throw ConfigurationError("solver is given by the first word");
      apply_settings(spec, settings);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("batch line " + std::to_string(lineno) + ": " + e.what());
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<BatchEntry> run_batch(std::vector<ExperimentSpec> specs, const std::string& out_dir,
                                  unsigned jobs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create '" + out_dir + "': " + ec.message());

  std::vector<BatchEntry> entries(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    entries[i].spec = std::move(specs[i]);
    entries[i].file = spec_hash_hex(entries[i].spec) + ".csv";
    entries[i].spec.out = (fs::path(out_dir) / entries[i].file).string();
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      BatchEntry& e = entries[i];
      try {
        e.summary = run_experiment(e.spec).summary;
      } catch (const std::exception& ex) {
        e.summary.solver = e.spec.solver;
        e.summary.hash = spec_hash_hex(e.spec);
        e.summary.termination = "error";
        e.summary.error = ex.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(entries.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream out(fs::path(out_dir) / "index.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write index in '" + out_dir + "'");
  out << "hash,solver,problem,termination,final_residue,passed,file\n";
  for (const BatchEntry& e : entries) {
    out << e.summary.hash << ',' << to_string(e.spec.solver) << ',' << to_string(e.spec.problem.kind)
        << ',' << e.summary.termination << ',' << format_double(e.summary.final_residue) << ','
        << (e.summary.passed() ? 1 : 0) << ',' << e.file << '\n';
  }
  if (!out) throw Error("index write failed in '" + out_dir + "'");
  return entries;
}

}  // namespace medex
