#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "nvfem/assembly.hpp"
#include "nvfem/fespace.hpp"

namespace nvfem {

enum class ProblemId { test41, test42, test43, poisson };

ProblemId parse_problem_id(std::string_view name);
std::string_view to_string(ProblemId id);

using MatrixField = std::function<Mat2(const Point&)>;

/// A benchmark problem A : D^2 u = f in (-1,1)^2, u = g on the boundary.
struct ProblemSpec {
  std::string name;
  MatrixField coefficient;
  /// Row-wise divergence of A, (div A)_b = sum_a d_a A_ab. Empty when A is
  /// not differentiable.
  VectorField coefficient_divergence;
  ScalarField rhs;
  ScalarField boundary;
  ScalarField exact_u;
  VectorField exact_grad;
  /// exact_u evaluated in extended precision, for finite-difference checks.
  std::function<long double(long double, long double)> exact_u_extended;
  std::map<std::string, double> params;

  CoefficientField coefficient_field() const;
};

struct ProblemParams {
  double K = 5000.0;  // steepness of the arctan coefficient (test42)
};

/// Throws std::invalid_argument for K <= 0 on test42.
ProblemSpec make_problem(ProblemId id, const ProblemParams& params = {});

/// Conforming Galerkin solution of the divergence-form rewrite
///   -(A grad U, grad v) - (div(A) . grad U, v) = (f, v)
/// with homogeneous Dirichlet data; returns the full length-N coefficients.
/// Requires `coefficient_divergence`.
Eigen::VectorXd standard_fem_solve(const ProblemSpec& problem, const FeSpace& space);

}  // namespace nvfem
