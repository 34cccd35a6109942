#include "nvfem/quasilinear.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "nvfem/quadrature.hpp"

namespace nvfem {

namespace {

constexpr double kPi = std::numbers::pi;

// Standard FEM step of the divergence-form fixed point:
//   (grad U / Q, grad v) = -(f / Q, v),  Q = sqrt(1 + |grad U_prev|^2).
Eigen::VectorXd variational_step(const FeSpace& space, const ScalarField& f,
                                 const Eigen::VectorXd& previous) {
  const int ni = space.num_interior();
  const auto& quad = triangle_quadrature(space.volume_quadrature_degree());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
  ShapeValues sv;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry geom(space.mesh(), c);
    const auto dofs = space.cell_dofs(c);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      evaluate_shapes(space.degree(), geom, quad.points[q], sv);
      Eigen::Vector2d grad_prev = Eigen::Vector2d::Zero();
      for (int i = 0; i < sv.count; ++i) grad_prev += previous[dofs[i]] * sv.grad[i];
      const double w = quad.weights[q] * 2.0 * geom.area /
                       std::sqrt(1.0 + grad_prev.squaredNorm());
      const double fx = f(geom.map(quad.points[q]));
      for (int i = 0; i < sv.count; ++i) {
        if (dofs[i] >= ni) continue;
        rhs[dofs[i]] -= w * fx * sv.value[i];
        for (int j = 0; j < sv.count; ++j) {
          if (dofs[j] < ni) triplets.emplace_back(dofs[i], dofs[j], w * sv.grad[i].dot(sv.grad[j]));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> k(ni, ni);
  k.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k);
  if (ldlt.info() != Eigen::Success) throw Error("quasilinear: stiffness factorization failed");
  return join_dofs(ldlt.solve(rhs), Eigen::VectorXd::Zero(space.num_boundary()));
}

}  // namespace

Mat2 mean_curvature_coefficient(const Eigen::Vector2d& grad) {
  return Mat2::Identity() + grad * grad.transpose() / (1.0 + grad.squaredNorm());
}

ProblemSpec mean_curvature_problem() {
  ProblemSpec p;
  p.name = "mean_curvature";
  p.exact_u = [](const Point& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
  p.exact_u_extended = [](long double x, long double y) {
    const long double pi = std::numbers::pi_v<long double>;
    return std::sin(pi * x) * std::sin(pi * y);
  };
  p.exact_grad = [](const Point& x) -> Eigen::Vector2d {
    return {kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
            kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y())};
  };
  p.rhs = [grad = p.exact_grad](const Point& x) {
    const double sx = std::sin(kPi * x.x()), sy = std::sin(kPi * x.y());
    const double cx = std::cos(kPi * x.x()), cy = std::cos(kPi * x.y());
    Mat2 hess;
    hess << -kPi * kPi * sx * sy, kPi * kPi * cx * cy, kPi * kPi * cx * cy, -kPi * kPi * sx * sy;
    return (mean_curvature_coefficient(grad(x)).array() * hess.array()).sum();
  };
  p.boundary = [](const Point&) { return 0.0; };
  return p;
}

QuasilinearResult quasilinear_solve(std::shared_ptr<const FeSpace> space, const ScalarField& f,
                                    const QuasilinearOptions& options) {
  const double h = mesh_metrics(space->mesh()).h;
  const double tolerance = options.tol_factor * h * h;

  QuasilinearResult result;
  Eigen::VectorXd previous = Eigen::VectorXd::Zero(space->num_dofs());

  NvSystem system;
  if (options.mode == Linearization::nonvariational) {
    system = assemble_system(space, constant_coefficient(Mat2::Identity()), f, {});
  }

  for (int k = 1; k <= options.max_iterations; ++k) {
    Eigen::VectorXd next;
    if (options.mode == Linearization::nonvariational) {
      if (k > 1) {
        const FeSpace* s = space.get();
        update_coefficient(system, [s, &previous](const EvalPoint& at) {
          return mean_curvature_coefficient(fe_gradient(*s, previous, at.cell, at.bary));
        });
      }
      const Solution sol = nvfem_solve(system, options.solver);
      result.linear_iterations += sol.stats.iterations;
      next = sol.coefficients();
    } else {
      next = variational_step(*space, f, previous);
    }
    const double change = l2_norm(*space, next - previous);
    result.history.push_back(change);
    previous = std::move(next);
    if (change <= tolerance) {
      result.stagnation_point = k;
      result.coefficients = std::move(previous);
      return result;
    }
  }

  std::ostringstream msg;
  msg << "quasilinear_solve: no stagnation within " << options.max_iterations
      << " iterations; last change " << result.history.back() << " > " << tolerance;
  SolverStats stats;
  stats.iterations = options.max_iterations;
  stats.residual = result.history.back();
  throw NonConvergenceError(msg.str(), stats, previous);
}

}  // namespace nvfem
