#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "nvfem/fespace.hpp"
#include "nvfem/linsolve.hpp"
#include "nvfem/problems.hpp"

namespace nvfem {

/// Quasilinear model problem in two linearizations:
///   variational:    div(grad u / Q) = f / Q,  Q = sqrt(1 + |grad u|^2)
///   nonvariational: (I + grad u grad u^T / Q^2) : D^2 u = f
/// The two are not the same equation (expanding the divergence gives a
/// minus sign), so with the manufactured f only the nonvariational fixed
/// point is sin(pi x) sin(pi y).
enum class Linearization {
  /// Fixed point on the divergence form, standard FEM per iterate.
  variational,
  /// Fixed point on the nondivergence form, NVFEM per iterate.
  nonvariational,
};

/// I + g g^T / (1 + |g|^2).
Mat2 mean_curvature_coefficient(const Eigen::Vector2d& grad);

/// Manufactured problem with exact solution sin(pi x) sin(pi y).
ProblemSpec mean_curvature_problem();

struct QuasilinearOptions {
  Linearization mode = Linearization::nonvariational;
  /// Stop at the first k with ||U^k - U^{k-1}|| <= tol_factor * h^2.
  double tol_factor = 1.0;
  int max_iterations = 100;
  SolveOptions solver;
};

struct QuasilinearResult {
  Eigen::VectorXd coefficients;  // full length-N
  int stagnation_point = 0;
  std::vector<double> history;   // ||U^k - U^{k-1}|| for k = 1, 2, ...
  int linear_iterations = 0;     // accumulated GMRES iterations (nonvariational)
};

/// Fixed-point iteration from U^0 = 0 with homogeneous Dirichlet data.
/// Throws NonConvergenceError if no iterate stagnates within max_iterations.
QuasilinearResult quasilinear_solve(std::shared_ptr<const FeSpace> space, const ScalarField& f,
                                    const QuasilinearOptions& options = {});

}  // namespace nvfem
