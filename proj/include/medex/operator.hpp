#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace medex {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using OperatorFn = std::function<Point(const Point&)>;
using JacobianFn = std::function<Matrix(const Point&)>;

/// Returns (1/j!) * D^j F(v)[h, ..., h] for j >= 2, the degree-j term of the
/// Taylor expansion of F around v evaluated at the displacement h.
using TaylorTermFn = std::function<Point(const Point& v, const Point& h, int j)>;

/// F(z) = A z + b.
struct AffineForm {
  Matrix A;
  Point b;
};

/// A monotone operator together with its derivative oracles and metadata.
///
/// `lipschitz` is the constant L of the smoothness class for `order`: the
/// (order-1)-th derivative of F is L-Lipschitz. For polynomial operators it
/// only holds on the ball of radius `region_radius` around the solution.
struct Problem {
  std::string name;
  int dim = 0;
  int order = 1;
  double lipschitz = 1.0;
  OperatorFn eval;
  JacobianFn jac;            // empty when no analytic Jacobian
  TaylorTermFn taylor_term;  // empty when no higher-order oracle
  std::optional<Point> solution;
  std::optional<double> region_radius;
  std::optional<double> strong_monotonicity;
  std::optional<AffineForm> affine;

  Point operator()(const Point& x) const { return eval(x); }
  bool has_jacobian() const { return static_cast<bool>(jac); }
  bool has_taylor_terms() const { return static_cast<bool>(taylor_term); }
};

enum class JacobianMode { analytic, central_difference };

struct JacobianOracle {
  JacobianMode mode = JacobianMode::analytic;
  /// Relative step; the absolute step is fd_step * (1 + |x|).
  double fd_step = default_fd_step();

  static double default_fd_step();
};

/// Throws ArgumentError unless x has problem dimension and finite entries.
void check_point(const Problem& problem, const Point& x);
bool all_finite(const Point& x);

/// Euclidean norm of F(x).
double residue(const Problem& problem, const Point& x);

Matrix jacobian(const Problem& problem, const Point& x, const JacobianOracle& oracle = {});

/// Analytic Jacobian when present, otherwise central differences.
Matrix best_jacobian(const Problem& problem, const Point& x);

/// Largest singular value.
double operator_norm(const Matrix& m);

enum class ProblemKind {
  affine_monotone,
  bilinear_saddle,
  strongly_monotone_affine,
  cubic_grad,
  scalar_cubed,
  strongmono_cubic,
};

struct ProblemDescriptor {
  ProblemKind kind = ProblemKind::bilinear_saddle;
  /// 0 selects the kind's default (2 for bilinear, 1 for scalar problems, 4 otherwise).
  int dim = 0;
  /// Order p the Lipschitz constant is declared for.
  int order = 1;
  std::uint64_t seed = 0;
  /// Strong monotonicity modulus (strongly_monotone_affine, strongmono_cubic).
  double mu = 1.0;
  /// Scale of the uniform entries of the skew part.
  double skew_scale = 1.0;
  /// Spectral norm of the PSD part of affine_monotone.
  double psd_scale = 1.0;
  /// Singular values of a random bilinear coupling are log-spaced over this many decades.
  double spectrum_decades = 1.0;
  /// Operating region |x - x*| <= radius for the polynomial operators.
  double radius = 1.0;
  /// Explicit A (affine_monotone), B (bilinear_saddle) or skew part
  /// (strongly_monotone_affine); random when absent.
  std::optional<Matrix> matrix;
  /// Explicit b; when absent a random solution is drawn and b = -A x*.
  std::optional<Point> offset;
};

Problem make_problem(const ProblemDescriptor& descriptor);

struct ZooEntry {
  ProblemKind kind;
  std::string name;
  std::vector<std::string> aliases;
  std::string summary;
};

const std::vector<ZooEntry>& zoo();
ProblemKind parse_problem_kind(std::string_view name);
std::string to_string(ProblemKind kind);

}  // namespace medex
