#pragma once

#include <vector>

#include <Eigen/Core>

namespace nvfem {

/// Symmetric rule on the reference triangle. Points are barycentric
/// coordinates; weights sum to the reference area 1/2.
struct TriangleQuadrature {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct EdgeQuadrature {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Cheapest available rule exact for polynomials of total degree
/// `degree` (supported up to 6).
const TriangleQuadrature& triangle_quadrature(int degree);

/// Gauss-Legendre rule exact up to `degree` (supported up to 7).
const EdgeQuadrature& edge_quadrature(int degree);

}  // namespace nvfem
