#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "medex/csv.hpp"
#include "medex/errors.hpp"
#include "medex/experiment.hpp"
#include "medex/rate_fit.hpp"

using namespace medex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("medex_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentSpec small_de(std::size_t iters) {
  ExperimentSpec spec;
  spec.solver = SolverKind::de;
  spec.problem.kind = ProblemKind::bilinear_saddle;
  spec.problem.dim = 6;
  spec.order = 1;
  spec.iters = iters;
  spec.seed = 42;
  spec.merit = true;
  return spec;
}

}  // namespace

TEST_CASE("double formatting round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  for (double x : {1.0 / 3.0, M_PI, 1e-17, 123456789.123456789, -0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("csv writing and reading") {
  Table t;
  t.columns = {"k", "value", "merit"};
  std::ostringstream empty;
  write_csv(t, empty);
  CHECK(empty.str() == "k,value,merit\n");

  t.add_row({std::int64_t{1}, 0.5, std::monostate{}});
  std::ostringstream one;
  write_csv(t, one);
  CHECK(one.str() == "k,value,merit\n1,0.5,\n");

  t.add_row({std::int64_t{2}, std::nan(""), 1e-20});
  std::ostringstream two;
  write_csv(t, two);
  CHECK(two.str() == "k,value,merit\n1,0.5,\n2,,1e-20\n");

  std::istringstream in(two.str());
  const CsvColumns back = read_csv(in);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.index("merit") == 2);
  CHECK(!back.rows[0][2].has_value());
  CHECK(*back.rows[1][2] == 1e-20);
  CHECK_THROWS_AS(back.index("missing"), ArgumentError);
  CHECK_THROWS_AS(t.add_row({1.0}), ArgumentError);
}

TEST_CASE("log-log fits") {
  std::vector<double> k, inv, flat;
  for (int i = 1; i <= 200; ++i) {
    k.push_back(i);
    inv.push_back(1.0 / i);
    flat.push_back(5.0);
  }
  const RateFit a = fit_log_log(k, inv, 1, 200);
  CHECK(std::abs(a.slope + 1.0) <= 1e-9);
  CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.points == 200);
  const RateFit b = fit_log_log(k, flat, 1, 200);
  CHECK(std::abs(b.slope) <= 1e-12);
  CHECK(b.r2 == 1.0);
  CHECK_THROWS_AS(fit_log_log(k, inv, 1, 19), ArgumentError);

  // nonpositive and non-finite values are dropped
  std::vector<double> noisy = inv;
  noisy[50] = 0.0;
  noisy[60] = -1.0;
  noisy[70] = std::nan("");
  CHECK(fit_log_log(k, noisy, 1, 200).points == 197);

  CHECK(default_rate_window(1e4) == std::pair<double, double>(100, 1e4));
  CHECK(default_rate_window(1e6) == std::pair<double, double>(1e4, 1e6));
}

TEST_CASE("settings parsing") {
  std::istringstream good("# comment\n p = 2 \n\nproblem=bilinear # trailing\n");
  const Settings s = parse_settings(good);
  CHECK(s.at("p") == "2");
  CHECK(s.at("problem") == "bilinear");
  std::istringstream dup("p = 1\np = 2\n");
  CHECK_THROWS_AS(parse_settings(dup), ConfigurationError);
  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(parse_settings(bad), ConfigurationError);

  ExperimentSpec spec;
  CHECK_THROWS_AS(apply_settings(spec, {{"no_such_key", "1"}}), ConfigurationError);
  CHECK_THROWS_AS(apply_settings(spec, {{"p", "two"}}), ConfigurationError);
  apply_settings(spec, {{"p", "2"}, {"problem", "bilinear"}, {"dim", "10"}, {"x0", "1, 2"}});
  CHECK(spec.order == 2);
  CHECK(spec.problem.kind == ProblemKind::bilinear_saddle);
  CHECK(spec.problem.dim == 10);
  CHECK(spec.x0->size() == 2);
}

TEST_CASE("command-line entries override the config file") {
  const Settings merged = merge_settings({{"p", "1"}, {"iters", "50"}}, {{"p", "2"}});
  CHECK(merged.at("p") == "2");
  CHECK(merged.at("iters") == "50");
}

TEST_CASE("spec hash depends on every field") {
  const ExperimentSpec a = small_de(10);
  ExperimentSpec b = a;
  CHECK(spec_hash_hex(a) == spec_hash_hex(b));
  CHECK(spec_hash_hex(a).size() == 16);
  b.seed = 43;
  CHECK(spec_hash(a) != spec_hash(b));
  b = a;
  b.x0_dist = 1.5;
  CHECK(spec_hash(a) != spec_hash(b));
}

TEST_CASE("dual extrapolation CSV row count and schema") {
  const fs::path dir = scratch_dir("rows");
  ExperimentSpec spec = small_de(300);
  spec.out = (dir / "run.csv").string();
  const ExperimentOutput out = run_experiment(spec);
  CHECK(out.summary.passed());
  CHECK(out.summary.rows == 300);
  const CsvColumns csv = read_csv_file(spec.out);
  CHECK(csv.columns == csv_schema(SolverKind::de));
  CHECK(csv.rows.size() == 300);

  // running infimum is nonincreasing and below the residue
  const std::size_t res = csv.index("residue"), inf = csv.index("inf_residue");
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(*csv.rows[i][inf] <= *csv.rows[i][res]);
    if (i > 0) CHECK(*csv.rows[i][inf] <= *csv.rows[i - 1][inf]);
  }
  // merit only on sampled rows, always on the last
  const std::size_t m = csv.index("merit_ergodic");
  CHECK(csv.rows.back()[m].has_value());
  std::size_t sampled = 0;
  for (const auto& row : csv.rows) sampled += row[m].has_value();
  CHECK(sampled < 300);
  CHECK(sampled > 50);
}

TEST_CASE("identical specs give byte-identical files") {
  const fs::path dir = scratch_dir("determinism");
  for (SolverKind kind : {SolverKind::de, SolverKind::flow, SolverKind::restart}) {
    ExperimentSpec spec = small_de(200);
    spec.solver = kind;
    spec.t_max = 0.5;
    spec.outer = 4;
    if (kind == SolverKind::restart) {
      spec.problem.kind = ProblemKind::strongmono_cubic;
      spec.problem.dim = 0;
      spec.order = 2;
      spec.merit = false;
    }
    spec.out = (dir / "a.csv").string();
    run_experiment(spec);
    spec.out = (dir / "b.csv").string();
    run_experiment(spec);
    const std::string a = slurp((dir / "a.csv").string());
    CHECK(!a.empty());
    CHECK_MESSAGE(a == slurp((dir / "b.csv").string()), to_string(kind));
  }
}

TEST_CASE("batch output does not depend on the thread count") {
  std::istringstream file(
      "# three runs\n"
      "solve problem=bilinear dim=4 p=1 iters=200 seed=1 merit=true\n"
      "solve problem=bilinear dim=4 p=2 iters=100 seed=2 merit=true\n"
      "flow problem=bilinear dim=2 p=2 t_max=0.3 seed=3\n");
  const std::vector<ExperimentSpec> specs = parse_batch(file);
  REQUIRE(specs.size() == 3);
  CHECK(specs[2].solver == SolverKind::flow);

  const fs::path one = scratch_dir("batch1"), three = scratch_dir("batch3");
  const auto a = run_batch(specs, one.string(), 1);
  const auto b = run_batch(specs, three.string(), 3);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].summary.passed());
    CHECK(fs::path(a[i].file).filename() == spec_hash_hex(specs[i]) + ".csv");
    CHECK(slurp(a[i].file) == slurp(b[i].file));
  }
  CHECK(slurp((one / "index.csv").string()) == slurp((three / "index.csv").string()));
}

TEST_CASE("solver failures land in the summary") {
  ExperimentSpec spec;
  spec.solver = SolverKind::flow;
  spec.problem.kind = ProblemKind::bilinear_saddle;
  spec.problem.dim = 4;
  spec.order = 2;
  spec.t_max = 0.1;
  spec.inner_tol = 1e-300;  // unreachable
  const ExperimentOutput out = run_experiment(spec);
  CHECK(out.summary.error.has_value());
  CHECK(!out.summary.passed());
}

TEST_CASE("invalid specs throw") {
  ExperimentSpec spec;
  spec.order = 0;
  CHECK_THROWS_AS(run_experiment(spec), Error);
}
