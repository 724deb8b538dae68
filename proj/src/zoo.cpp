#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "medex/errors.hpp"
#include "medex/operator.hpp"
#include "medex/random.hpp"

namespace medex {
namespace {

Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(n, n));
  Matrix q = qr.householderQ();
  // fix column signs so the factor is a deterministic function of the draw
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  return q;
}

Matrix random_skew(Rng& rng, Eigen::Index n, double scale) {
  const Matrix u = rng.uniform_matrix(n, n, -scale, scale);
  return 0.5 * (u - u.transpose());
}

double min_symmetric_eigenvalue(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Fills b and solution. With an explicit offset the zero of A x + b is
// computed; otherwise a solution is drawn and b = -A x*.
void attach_affine(Problem& problem, Matrix A, const std::optional<Point>& offset, Rng& rng) {
  const auto n = A.rows();
  Point b;
  Point solution;
  if (offset) {
    if (offset->size() != n) throw ConstructionError("offset dimension does not match operator");
    b = *offset;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    solution = cod.solve(-b);
    const double defect = (A * solution + b).norm();
    if (defect > 1e-10 * (1.0 + b.norm())) {
      throw ConstructionError("affine operator has no zero for the given offset");
    }
  } else {
    solution = rng.uniform_vector(n, -1.0, 1.0);
    b = -(A * solution);
  }
  const double norm_a = operator_norm(A);
  problem.dim = static_cast<int>(n);
  // For order >= 2 the derivative is constant, so any positive L is valid;
  // the operator norm keeps the regularization on the operator's own scale.
  problem.lipschitz = norm_a > 0.0 ? norm_a : 1.0;
  problem.eval = [A, b](const Point& x) -> Point { return A * x + b; };
  problem.jac = [A](const Point&) -> Matrix { return A; };
  problem.taylor_term = [](const Point&, const Point& h, int) -> Point {
    return Point::Zero(h.size());
  };
  problem.solution = solution;
  problem.affine = AffineForm{std::move(A), std::move(b)};
}

// F(x) = mu * x + c * |x|^2 x with solution 0. Covers cubic_grad (mu = 0)
// and strongmono_cubic; scalar_cubed is the 1-D case with c = 1, mu = 0.
void attach_cubic(Problem& problem, int dim, double mu, int order, double radius) {
  problem.dim = dim;
  problem.eval = [mu](const Point& x) -> Point { return (mu + x.squaredNorm()) * x; };
  problem.jac = [mu, dim](const Point& x) -> Matrix {
    Matrix J = (mu + x.squaredNorm()) * Matrix::Identity(dim, dim);
    J += 2.0 * x * x.transpose();
    return J;
  };
  // (v+h)|v+h|^2 expanded by degree in h.
  problem.taylor_term = [](const Point& v, const Point& h, int j) -> Point {
    switch (j) {
      case 2:
        return 2.0 * v.dot(h) * h + h.squaredNorm() * v;
      case 3:
        return h.squaredNorm() * h;
      default:
        return Point::Zero(h.size());
    }
  };
  problem.solution = Point::Zero(dim);
  problem.region_radius = radius;
  // Bounds on |x| <= R: |DF| <= mu + 3R^2, D^2F is 6R-Lipschitz in x-scale,
  // D^3F has operator norm 6.
  switch (order) {
    case 1:
      problem.lipschitz = mu + 3.0 * radius * radius;
      break;
    case 2:
      problem.lipschitz = 6.0 * radius;
      break;
    case 3:
      problem.lipschitz = 6.0;
      break;
    default:
      throw UnsupportedError("polynomial zoo problems declare L only for orders 1..3");
  }
}

std::string normalize(std::string_view name) {
  std::string out(name);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '-') c = '_';
  }
  return out;
}

}  // namespace

const std::vector<ZooEntry>& zoo() {
  static const std::vector<ZooEntry> entries = {
      {ProblemKind::affine_monotone, "affine_monotone", {"affine"},
       "F(x) = (S + M) x + b, S skew, M PSD with spectral norm psd_scale"},
      {ProblemKind::bilinear_saddle, "bilinear_saddle", {"bilinear"},
       "F(x, y) = (B y, -B^T x) + b; gradient field of the saddle x^T B y"},
      {ProblemKind::strongly_monotone_affine, "strongly_monotone_affine",
       {"strongmono_affine", "strongmono"},
       "F(x) = (mu I + S) x + b, mu-strongly monotone"},
      {ProblemKind::cubic_grad, "cubic_grad", {"cubic"},
       "F(x) = |x|^2 x, gradient of |x|^4 / 4; locally smooth"},
      {ProblemKind::scalar_cubed, "scalar_cubed", {"cubed"}, "F(x) = x^3 in one dimension"},
      {ProblemKind::strongmono_cubic, "strongmono_cubic", {},
       "F(x) = mu x + |x|^2 x, mu-strongly monotone; locally smooth"},
  };
  return entries;
}

ProblemKind parse_problem_kind(std::string_view name) {
  const std::string key = normalize(name);
  for (const auto& entry : zoo()) {
    if (entry.name == key) return entry.kind;
    if (std::find(entry.aliases.begin(), entry.aliases.end(), key) != entry.aliases.end())
      return entry.kind;
  }
  throw ArgumentError("unknown problem '" + std::string(name) + "'");
}

std::string to_string(ProblemKind kind) {
  for (const auto& entry : zoo())
    if (entry.kind == kind) return entry.name;
  return "unknown";
}

Problem make_problem(const ProblemDescriptor& d) {
  if (d.order < 1) throw ConstructionError("order must be at least 1");
  Rng rng(d.seed);
  Problem problem;
  problem.name = to_string(d.kind);
  problem.order = d.order;

  switch (d.kind) {
    case ProblemKind::affine_monotone: {
      Matrix A;
      if (d.matrix) {
        A = *d.matrix;
        if (A.rows() != A.cols()) throw ConstructionError("affine operator must be square");
        const double lo = min_symmetric_eigenvalue(A);
        if (lo < -1e-12 * (1.0 + operator_norm(A))) {
          throw ConstructionError("symmetric part is not positive semidefinite (min eigenvalue " +
                                  std::to_string(lo) + ")");
        }
      } else {
        const int n = d.dim > 0 ? d.dim : 4;
        if (d.psd_scale < 0.0) throw ConstructionError("psd_scale must be nonnegative");
        const Matrix G = rng.uniform_matrix(n, n, -1.0, 1.0);
        const Matrix gram = G.transpose() * G;
        Matrix M = gram / operator_norm(gram) * d.psd_scale;
        A = random_skew(rng, n, d.skew_scale) + M;
      }
      attach_affine(problem, std::move(A), d.offset, rng);
      problem.strong_monotonicity = std::max(0.0, min_symmetric_eigenvalue(problem.affine->A));
      break;
    }
    case ProblemKind::bilinear_saddle: {
      Matrix B;
      if (d.matrix) {
        B = *d.matrix;
      } else {
        const int n = d.dim > 0 ? d.dim : 2;
        if (n % 2 != 0) throw ConstructionError("bilinear_saddle needs an even dimension");
        const int half = n / 2;
        if (d.spectrum_decades < 0.0) throw ConstructionError("spectrum_decades must be >= 0");
        Point sigma(half);
        for (int i = 0; i < half; ++i) {
          const double frac = half > 1 ? static_cast<double>(i) / (half - 1) : 0.0;
          sigma[i] = std::pow(10.0, -d.spectrum_decades * frac);
        }
        const Matrix U = random_orthogonal(rng, half);
        const Matrix V = random_orthogonal(rng, half);
        B = U * sigma.asDiagonal() * V.transpose();
      }
      const auto m = B.rows();
      const auto n = B.cols();
      Matrix A = Matrix::Zero(m + n, m + n);
      A.topRightCorner(m, n) = B;
      A.bottomLeftCorner(n, m) = -B.transpose();
      attach_affine(problem, std::move(A), d.offset, rng);
      break;
    }
    case ProblemKind::strongly_monotone_affine: {
      if (!(d.mu > 0.0)) throw ConstructionError("mu must be positive");
      Matrix S;
      if (d.matrix) {
        S = *d.matrix;
        if (S.rows() != S.cols() || !(S + S.transpose()).isZero(1e-14)) {
          throw ConstructionError("skew part must be antisymmetric");
        }
      } else {
        const int n = d.dim > 0 ? d.dim : (d.offset ? static_cast<int>(d.offset->size()) : 4);
        S = random_skew(rng, n, d.skew_scale);
      }
      Matrix A = d.mu * Matrix::Identity(S.rows(), S.cols()) + S;
      attach_affine(problem, std::move(A), d.offset, rng);
      problem.strong_monotonicity = d.mu;
      break;
    }
    case ProblemKind::cubic_grad: {
      if (!(d.radius > 0.0)) throw ConstructionError("radius must be positive");
      attach_cubic(problem, d.dim > 0 ? d.dim : 4, 0.0, d.order, d.radius);
      break;
    }
    case ProblemKind::scalar_cubed: {
      if (d.dim > 1) throw ConstructionError("scalar_cubed is one-dimensional");
      if (!(d.radius > 0.0)) throw ConstructionError("radius must be positive");
      attach_cubic(problem, 1, 0.0, d.order, d.radius);
      break;
    }
    case ProblemKind::strongmono_cubic: {
      if (!(d.mu > 0.0)) throw ConstructionError("mu must be positive");
      if (!(d.radius > 0.0)) throw ConstructionError("radius must be positive");
      attach_cubic(problem, d.dim > 0 ? d.dim : 1, d.mu, d.order, d.radius);
      problem.strong_monotonicity = d.mu;
      break;
    }
  }
  return problem;
}

}  // namespace medex
