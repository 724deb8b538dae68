// Command-line experiment runner.
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "medex/csv.hpp"
#include "medex/errors.hpp"
#include "medex/experiment.hpp"
#include "medex/rate_fit.hpp"

namespace {

using medex::Settings;

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const FlagSpec kFlags[] = {
    {"--problem", "problem", "zoo problem name (see 'zoo list')"},
    {"--dim", "dim", "problem dimension"},
    {"--p", "p", "order p"},
    {"--L", "L", "Lipschitz constant (defaults to the problem's)"},
    {"--iters", "iters", "dual extrapolation iterations"},
    {"--residue-stop", "residue_stop", "stop once |F(x_k)| falls below this"},
    {"--lambda-fraction", "lambda_fraction", "lambda L |x-v|^{p-1}/p!, within [1/(12p-6), 1/(4p+2)]"},
    {"--tol-sub", "tol_sub", "subproblem residual tolerance"},
    {"--outer", "outer", "restart count"},
    {"--mu", "mu", "strong monotonicity modulus"},
    {"--stop-residue", "stop_residue", "restart stops once |F(x_k)| falls below this"},
    {"--h", "h", "flow step"},
    {"--t-max", "t_max", "flow horizon"},
    {"--inner-tol", "inner_tol", "flow algebraic solve tolerance"},
    {"--seed", "seed", "seed for problem and start point"},
    {"--x0-dist", "x0_dist", "distance of the start from x*"},
    {"--x0", "x0", "explicit start, comma separated"},
    {"--D", "D", "merit radius (default 2 |x0 - x*|)"},
    {"--merit-per-decade", "merit_per_decade", "merit samples per decade"},
    {"--merit-starts", "merit_starts", "starts for the sampled merit bound"},
    {"--out", "out", "CSV output path"},
    {"--radius", "radius", "operating radius of polynomial problems"},
    {"--spectrum-decades", "spectrum_decades", "singular value spread of bilinear couplings"},
    {"--skew-scale", "skew_scale", "scale of random skew parts"},
    {"--psd-scale", "psd_scale", "norm of random PSD parts"},
};

struct RunOptions {
  Settings flags;
  std::string config;
  std::string solver;
};

void add_run_options(CLI::App* app, RunOptions& opts) {
  app->set_help_flag("--help", "print this help");  // -h would clash with --h
  for (const FlagSpec& f : kFlags) {
    const std::string key = f.key;
    app->add_option_function<std::string>(
        f.flag, [&opts, key](const std::string& v) { opts.flags[key] = v; }, f.help);
  }
  app->add_flag_function(
      "--merit", [&opts](std::int64_t) { opts.flags["merit"] = "true"; },
      "evaluate the merit of the ergodic iterate");
  app->add_option("--config", opts.config, "key = value settings file (flags take precedence)");
}

medex::ExperimentSpec build_spec(const RunOptions& opts, medex::SolverKind default_solver) {
  Settings merged;
  if (!opts.config.empty()) merged = medex::read_settings_file(opts.config);
  merged = medex::merge_settings(std::move(merged), opts.flags);
  medex::ExperimentSpec spec;
  spec.solver = default_solver;
  medex::apply_settings(spec, merged);
  if (!opts.solver.empty()) spec.solver = medex::parse_solver_kind(opts.solver);
  return spec;
}

int run_and_report(const medex::ExperimentSpec& spec) {
  const medex::ExperimentOutput out = medex::run_experiment(spec);
  medex::print_summary(out.summary, std::cout);
  return out.summary.passed() ? 0 : 1;
}

int run_rates(const std::string& path, std::vector<std::string> columns, double k_min,
              double k_max) {
  const medex::CsvColumns csv = medex::read_csv_file(path);
  if (csv.rows.empty()) throw medex::ArgumentError("'" + path + "' has no data rows");
  if (columns.empty()) {
    for (const char* c : {"merit_ergodic", "inf_residue"}) {
      for (const auto& name : csv.columns)
        if (name == c) columns.emplace_back(c);
    }
    if (columns.empty()) columns.emplace_back("residue");
  }
  double horizon = 0.0;
  for (const auto& row : csv.rows)
    if (row[0]) horizon = std::max(horizon, *row[0]);
  const auto window = medex::default_rate_window(horizon);
  if (std::isnan(k_min)) k_min = window.first;
  if (std::isnan(k_max)) k_max = window.second;

  std::cout << "column,k_min,k_max,slope,intercept,r2,points\n";
  for (const auto& column : columns) {
    const medex::RateFit fit = medex::fit_rate_slope(path, column, k_min, k_max);
    std::cout << fit.column << ',' << medex::format_double(fit.k_min) << ','
              << medex::format_double(fit.k_max) << ',' << medex::format_double(fit.slope) << ','
              << medex::format_double(fit.intercept) << ',' << medex::format_double(fit.r2)
              << ',' << fit.points << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order dual extrapolation for monotone equations: experiment runner"};
  app.require_subcommand(1);

  RunOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "run p-th order dual extrapolation");
  add_run_options(solve, solve_opts);

  RunOptions restart_opts;
  auto* restart = app.add_subcommand("restart", "run the restarted scheme");
  add_run_options(restart, restart_opts);

  RunOptions flow_opts;
  auto* flow = app.add_subcommand("flow", "integrate the rescaled gradient flow");
  add_run_options(flow, flow_opts);

  RunOptions certify_opts;
  auto* certify = app.add_subcommand("certify", "run a solver and report its certificates");
  add_run_options(certify, certify_opts);
  certify->add_option("--solver", certify_opts.solver, "de, restart or flow")
      ->check(CLI::IsMember({"de", "restart", "flow"}));

  std::string rates_csv;
  std::vector<std::string> rates_columns;
  double k_min = std::nan("");
  double k_max = std::nan("");
  auto* rates = app.add_subcommand("rates", "fit log-log slopes of CSV columns");
  rates->add_option("csv", rates_csv, "CSV produced by solve or flow")->required();
  rates->add_option("--column", rates_columns, "columns to fit (default merit_ergodic, inf_residue)");
  rates->add_option("--k-min", k_min, "window start (default max(100, T/100))");
  rates->add_option("--k-max", k_max, "window end (default T)");

  auto* zoo = app.add_subcommand("zoo", "problem catalogue");
  zoo->require_subcommand(1);
  auto* zoo_list = zoo->add_subcommand("list", "list zoo problems");

  std::string batch_file;
  std::string batch_dir = "batch_out";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* batch = app.add_subcommand("batch", "run experiments listed in a file concurrently");
  batch->add_option("file", batch_file, "one experiment per line: solver key=value ...")
      ->required();
  batch->add_option("--out-dir", batch_dir, "directory for <hash>.csv files and index.csv");
  batch->add_option("--jobs", jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_and_report(build_spec(solve_opts, medex::SolverKind::de));
    if (restart->parsed()) {
      return run_and_report(build_spec(restart_opts, medex::SolverKind::restart));
    }
    if (flow->parsed()) return run_and_report(build_spec(flow_opts, medex::SolverKind::flow));
    if (certify->parsed()) {
      return run_and_report(build_spec(certify_opts, medex::SolverKind::de));
    }
    if (rates->parsed()) return run_rates(rates_csv, rates_columns, k_min, k_max);
    if (zoo_list->parsed()) {
      for (const medex::ZooEntry& e : medex::zoo()) {
        std::cout << e.name;
        for (const auto& a : e.aliases) std::cout << ' ' << a;
        std::cout << "\n    " << e.summary << '\n';
      }
      return 0;
    }
    if (batch->parsed()) {
      std::ifstream in(batch_file);
      if (!in) throw medex::ConfigurationError("cannot open batch file '" + batch_file + "'");
      const auto entries = medex::run_batch(medex::parse_batch(in), batch_dir, jobs);
      bool all = true;
      for (const auto& e : entries) {
        std::cout << e.file << ' ' << (e.summary.passed() ? "PASS" : "FAIL") << ' '
                  << e.summary.termination << '\n';
        all = all && e.summary.passed();
      }
      return all ? 0 : 1;
    }
  } catch (const medex::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const medex::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
