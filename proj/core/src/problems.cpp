#include "nvfem/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

#include "nvfem/errors.hpp"
#include "nvfem/quadrature.hpp"

namespace nvfem {

namespace {

constexpr double kPi = std::numbers::pi;

template <class T>
T gaussian_bump(T x, T y) {
  using std::exp;
  return exp(T(-10) * (x * x + y * y));
}

template <class T>
T sine_product(T x, T y) {
  using std::sin;
  const T pi = std::numbers::pi_v<T>;
  return sin(pi * x) * sin(pi * y);
}

template <class T>
T saddle(T x, T y) {
  const T r2 = x * x + y * y;
  if (r2 == T(0)) return T(0);
  return x * y * (x * x - y * y) / r2;
}

Eigen::Vector2d sine_product_gradient(const Point& p) {
  const double x = p.x(), y = p.y();
  return {kPi * std::cos(kPi * x) * std::sin(kPi * y),
          kPi * std::sin(kPi * x) * std::cos(kPi * y)};
}

// (x^2 y^2)^{1/3}
double cube_root_weight(const Point& p) { return std::cbrt(p.x() * p.x() * p.y() * p.y()); }

ProblemSpec make_test41() {
  ProblemSpec p;
  p.name = "test41";
  p.coefficient = [](const Point& x) {
    Mat2 a;
    a << 1.0, 0.0, 0.0, cube_root_weight(x) + 1.0;
    return a;
  };
  p.exact_u = [](const Point& x) { return gaussian_bump(x.x(), x.y()); };
  p.exact_u_extended = [](long double x, long double y) { return gaussian_bump(x, y); };
  p.exact_grad = [](const Point& x) -> Eigen::Vector2d {
    return -20.0 * gaussian_bump(x.x(), x.y()) * x;
  };
  p.rhs = [](const Point& x) {
    const double u = gaussian_bump(x.x(), x.y());
    const double uxx = (400.0 * x.x() * x.x() - 20.0) * u;
    const double uyy = (400.0 * x.y() * x.y() - 20.0) * u;
    return uxx + (cube_root_weight(x) + 1.0) * uyy;
  };
  p.boundary = [](const Point&) { return 0.0; };
  return p;
}

ProblemSpec make_test42(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("test42: K must be positive");
  ProblemSpec p;
  p.name = "test42";
  p.params["K"] = k;
  auto a = [k](const Point& x) { return std::atan(k * (x.squaredNorm() - 1.0)) + 2.0; };
  p.coefficient = [a](const Point& x) {
    Mat2 m;
    m << 1.0, 0.0, 0.0, a(x);
    return m;
  };
  // (div A)_b = sum_a d_a A_ab = (0, d_y a).
  p.coefficient_divergence = [k](const Point& x) -> Eigen::Vector2d {
    const double s = x.squaredNorm() - 1.0;
    return {0.0, 2.0 * k * x.y() / (1.0 + k * k * s * s)};
  };
  p.exact_u = [](const Point& x) { return sine_product(x.x(), x.y()); };
  p.exact_u_extended = [](long double x, long double y) { return sine_product(x, y); };
  p.exact_grad = sine_product_gradient;
  p.rhs = [a](const Point& x) {
    // u_xx = u_yy = -pi^2 u
    return -kPi * kPi * sine_product(x.x(), x.y()) * (1.0 + a(x));
  };
  p.boundary = [](const Point&) { return 0.0; };
  return p;
}

ProblemSpec make_test43() {
  ProblemSpec p;
  p.name = "test43";
  p.coefficient = [](const Point& x) {
    const double b = cube_root_weight(x);
    Mat2 m;
    m << 1.0, b, b, 2.0;
    return m;
  };
  p.exact_u = [](const Point& x) { return saddle(x.x(), x.y()); };
  p.exact_u_extended = [](long double x, long double y) { return saddle(x, y); };
  p.exact_grad = [](const Point& p) -> Eigen::Vector2d {
    const double x = p.x(), y = p.y();
    const double r2 = x * x + y * y;
    if (r2 == 0.0) return Eigen::Vector2d::Zero();
    const double x2 = x * x, y2 = y * y, r4 = r2 * r2;
    return {y * (x2 * x2 + 4.0 * x2 * y2 - y2 * y2) / r4,
            x * (x2 * x2 - 4.0 * x2 * y2 - y2 * y2) / r4};
  };
  p.rhs = [](const Point& p) {
    const double x = p.x(), y = p.y();
    const double r2 = x * x + y * y;
    if (r2 == 0.0) return 0.0;
    const double x2 = x * x, y2 = y * y, r6 = r2 * r2 * r2;
    const double uxx = -4.0 * x * y2 * y * (x2 - 3.0 * y2) / r6;
    const double uyy = -4.0 * x2 * x * y * (3.0 * x2 - y2) / r6;
    const double uxy = (x2 - y2) * (x2 * x2 + 10.0 * x2 * y2 + y2 * y2) / r6;
    return uxx + 2.0 * cube_root_weight(p) * uxy + 2.0 * uyy;
  };
  p.boundary = p.exact_u;
  return p;
}

ProblemSpec make_poisson() {
  ProblemSpec p;
  p.name = "poisson";
  p.coefficient = [](const Point&) -> Mat2 { return Mat2::Identity(); };
  p.coefficient_divergence = [](const Point&) -> Eigen::Vector2d {
    return Eigen::Vector2d::Zero();
  };
  p.exact_u = [](const Point& x) { return sine_product(x.x(), x.y()); };
  p.exact_u_extended = [](long double x, long double y) { return sine_product(x, y); };
  p.exact_grad = sine_product_gradient;
  p.rhs = [](const Point& x) { return -2.0 * kPi * kPi * sine_product(x.x(), x.y()); };
  p.boundary = [](const Point&) { return 0.0; };
  return p;
}

}  // namespace

ProblemId parse_problem_id(std::string_view name) {
  if (name == "test41") return ProblemId::test41;
  if (name == "test42") return ProblemId::test42;
  if (name == "test43") return ProblemId::test43;
  if (name == "poisson") return ProblemId::poisson;
  throw std::invalid_argument("unknown problem id '" + std::string(name) + "'");
}

std::string_view to_string(ProblemId id) {
  switch (id) {
    case ProblemId::test41: return "test41";
    case ProblemId::test42: return "test42";
    case ProblemId::test43: return "test43";
    case ProblemId::poisson: return "poisson";
  }
  return "unknown";
}

CoefficientField ProblemSpec::coefficient_field() const {
  return [a = coefficient](const EvalPoint& at) { return a(at.x); };
}

ProblemSpec make_problem(ProblemId id, const ProblemParams& params) {
  switch (id) {
    case ProblemId::test41: return make_test41();
    case ProblemId::test42: return make_test42(params.K);
    case ProblemId::test43: return make_test43();
    case ProblemId::poisson: return make_poisson();
  }
  throw std::invalid_argument("make_problem: unknown problem id");
}

Eigen::VectorXd standard_fem_solve(const ProblemSpec& problem, const FeSpace& space) {
  if (!problem.coefficient_divergence) {
    throw std::invalid_argument("standard_fem_solve: problem '" + problem.name +
                                "' has no divergence of its coefficient");
  }
  const int ni = space.num_interior();
  if (ni == 0) throw DegenerateSystemError("standard_fem_solve: no interior dofs");

  const Eigen::VectorXd g = boundary_values(space, problem.boundary);
  const auto& quad = triangle_quadrature(space.volume_quadrature_degree());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
  ShapeValues sv;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry geom(space.mesh(), c);
    const auto dofs = space.cell_dofs(c);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      evaluate_shapes(space.degree(), geom, quad.points[q], sv);
      const Point x = geom.map(quad.points[q]);
      const double w = quad.weights[q] * 2.0 * geom.area;
      const Mat2 a = problem.coefficient(x);
      const Eigen::Vector2d div_a = problem.coefficient_divergence(x);
      const double fx = problem.rhs(x);
      for (int i = 0; i < sv.count; ++i) {
        if (dofs[i] >= ni) continue;
        rhs[dofs[i]] += w * fx * sv.value[i];
        for (int j = 0; j < sv.count; ++j) {
          const double v =
              -w * (sv.grad[i].dot(a * sv.grad[j]) + div_a.dot(sv.grad[j]) * sv.value[i]);
          if (dofs[j] < ni) {
            triplets.emplace_back(dofs[i], dofs[j], v);
          } else {
            rhs[dofs[i]] -= v * g[dofs[j] - ni];
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> l(ni, ni);
  l.setFromTriplets(triplets.begin(), triplets.end());
  l.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(l);
  if (lu.info() != Eigen::Success) {
    throw Error("standard_fem_solve: LU factorization failed");
  }
  const Eigen::VectorXd u = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !u.allFinite()) {
    throw Error("standard_fem_solve: linear solve failed");
  }
  return join_dofs(u, g);
}

}  // namespace nvfem
