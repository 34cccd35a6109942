#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "nvfem/mesh.hpp"

namespace nvfem {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

inline constexpr int kMaxLocalDofs = 6;

/// Affine data of one triangle: vertices, area and barycentric gradients.
struct CellGeometry {
  std::array<Point, 3> vertices;
  std::array<Eigen::Vector2d, 3> grad_bary;
  double area = 0.0;

  CellGeometry(const Mesh& mesh, int cell);
  Point map(const Eigen::Vector3d& bary) const;
};

/// Lagrange basis values and physical gradients at one point of a cell.
///
/// Local numbering: vertices 0,1,2, then (P2) midpoints of local edges
/// (0,1), (1,2), (2,0).
struct ShapeValues {
  int count = 0;
  std::array<double, kMaxLocalDofs> value{};
  std::array<Eigen::Vector2d, kMaxLocalDofs> grad{};
};

void evaluate_shapes(int degree, const CellGeometry& geom, const Eigen::Vector3d& bary,
                     ShapeValues& out);

/// Continuous Lagrange space of degree 1 or 2 over a mesh.
///
/// Dofs are numbered interior first: indices [0, num_interior()) belong to
/// the interior space, [num_interior(), num_dofs()) to boundary nodes.
class FeSpace {
 public:
  /// Throws UnsupportedError unless degree is 1 or 2.
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int dofs_per_cell() const { return degree_ == 1 ? 3 : 6; }

  int num_dofs() const { return static_cast<int>(dof_coords_.size()); }
  int num_interior() const { return num_interior_; }
  int num_boundary() const { return num_dofs() - num_interior_; }
  bool is_boundary_dof(int dof) const { return dof >= num_interior_; }

  const std::vector<Point>& dof_coords() const { return dof_coords_; }
  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * dofs_per_cell(),
            static_cast<std::size_t>(dofs_per_cell())};
  }

  /// Quadrature exactness used for volume integrals (2p + 2).
  int volume_quadrature_degree() const { return 2 * degree_ + 2; }
  /// Quadrature exactness used for boundary integrals (2p + 1).
  int edge_quadrature_degree() const { return 2 * degree_ + 1; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  int num_interior_ = 0;
  std::vector<Point> dof_coords_;
  std::vector<int> cell_dofs_;
};

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree);
std::shared_ptr<const FeSpace> build_space(Mesh mesh, int degree);

/// Nodal interpolant: coefficient i is g evaluated at dof i.
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& g);

/// Value and gradient of the FE function with coefficients `coeffs` on
/// `cell` at barycentric point `bary`.
double fe_value(const FeSpace& space, const Eigen::VectorXd& coeffs, int cell,
                const Eigen::Vector3d& bary);
Eigen::Vector2d fe_gradient(const FeSpace& space, const Eigen::VectorXd& coeffs, int cell,
                            const Eigen::Vector3d& bary);

struct ErrorNorms {
  double l2 = 0.0;      // ||u - U||
  double h1_semi = 0.0; // |u - U|_1
};

/// L2 and H1-seminorm errors of the FE function against an exact solution.
ErrorNorms error_norms(const FeSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& u,
                       const VectorField& grad_u);

/// L2 norm of an FE function.
double l2_norm(const FeSpace& space, const Eigen::VectorXd& coeffs);

/// Concatenates interior and boundary coefficient blocks into a full
/// length-N vector.
Eigen::VectorXd join_dofs(const Eigen::VectorXd& interior, const Eigen::VectorXd& boundary);

}  // namespace nvfem
