#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nvfem/assembly.hpp"
#include "nvfem/fespace.hpp"
#include "nvfem/mesh.hpp"

namespace nvfem::testing {

inline std::mt19937_64 make_rng(std::uint64_t salt = 0) { return std::mt19937_64(20240601 + salt); }

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Point random_interior_point(std::mt19937_64& rng, double margin = 0.0) {
  std::uniform_real_distribution<double> dist(-1.0 + margin, 1.0 - margin);
  return {dist(rng), dist(rng)};
}

inline Eigen::Vector3d random_bary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double a = dist(rng), b = dist(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return {1.0 - a - b, a, b};
}

// Boundary integral of n_beta * d_alpha V over the square, written
// independently of assembly: 5-point Gauss-Legendre on each boundary edge,
// normal from the edge direction and the owning cell's third vertex.
inline double boundary_flux(const FeSpace& space, const Eigen::VectorXd& coeffs, int alpha,
                            int beta) {
  static const std::array<double, 5> x = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
  static const std::array<double, 5> w = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};
  const Mesh& mesh = space.mesh();
  double total = 0.0;
  for (const auto& be : mesh.boundary_edges()) {
    const Cell& cell = mesh.cells()[be.cell];
    const Point a = mesh.vertex(be.vertices[0]), b = mesh.vertex(be.vertices[1]);
    int third = 0;
    for (int k = 0; k < 3; ++k) {
      if (cell[k] != be.vertices[0] && cell[k] != be.vertices[1]) third = cell[k];
    }
    Eigen::Vector2d n(b.y() - a.y(), a.x() - b.x());
    n.normalize();
    if (n.dot(mesh.vertex(third) - a) > 0) n = -n;
    const double len = (b - a).norm();
    for (int q = 0; q < 5; ++q) {
      const double t = 0.5 * (x[q] + 1.0);
      Eigen::Vector3d bary = Eigen::Vector3d::Zero();
      for (int k = 0; k < 3; ++k) {
        if (cell[k] == be.vertices[0]) bary[k] = 1.0 - t;
        if (cell[k] == be.vertices[1]) bary[k] = t;
      }
      const Eigen::Vector2d g = fe_gradient(space, coeffs, be.cell, bary);
      total += 0.5 * w[q] * len * n[beta] * g[alpha];
    }
  }
  return total;
}

using Ld = long double;

// Central-difference Hessian of u in extended precision.
inline Mat2 fd_hessian(const std::function<Ld(Ld, Ld)>& u, const Point& p, Ld h = 1e-5L) {
  const Ld x = p.x(), y = p.y();
  const Ld c = u(x, y);
  const Ld uxx = (u(x + h, y) - 2 * c + u(x - h, y)) / (h * h);
  const Ld uyy = (u(x, y + h) - 2 * c + u(x, y - h)) / (h * h);
  const Ld uxy = (u(x + h, y + h) - u(x + h, y - h) - u(x - h, y + h) + u(x - h, y - h)) / (4 * h * h);
  Mat2 m;
  m << static_cast<double>(uxx), static_cast<double>(uxy), static_cast<double>(uxy),
      static_cast<double>(uyy);
  return m;
}

inline Eigen::Vector2d fd_gradient(const std::function<Ld(Ld, Ld)>& u, const Point& p, Ld h = 1e-6L) {
  const Ld x = p.x(), y = p.y();
  return {static_cast<double>((u(x + h, y) - u(x - h, y)) / (2 * h)),
          static_cast<double>((u(x, y + h) - u(x, y - h)) / (2 * h))};
}

// 100 interior points at least 0.05 from the origin: with a fixed step of
// 1e-5 the difference quotient error near a point singularity grows like
// step^2 / r^2.
inline std::vector<Point> sample_points(std::uint64_t salt) {
  auto rng = testing::make_rng(salt);
  std::vector<Point> pts;
  while (pts.size() < 100) {
    const Point p = testing::random_interior_point(rng, 1e-4);
    if (p.norm() >= 0.05) pts.push_back(p);
  }
  return pts;
}

}  // namespace nvfem::testing
