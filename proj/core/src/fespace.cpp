#include "nvfem/fespace.hpp"

#include <cmath>

#include "nvfem/errors.hpp"
#include "nvfem/quadrature.hpp"

namespace nvfem {

CellGeometry::CellGeometry(const Mesh& mesh, int cell) {
  const auto& c = mesh.cells()[cell];
  for (int k = 0; k < 3; ++k) vertices[k] = mesh.vertex(c[k]);
  area = mesh.area(cell);
  const double inv = 1.0 / (2.0 * area);
  for (int i = 0; i < 3; ++i) {
    const Point& pj = vertices[(i + 1) % 3];
    const Point& pk = vertices[(i + 2) % 3];
    grad_bary[i] = Eigen::Vector2d(pj.y() - pk.y(), pk.x() - pj.x()) * inv;
  }
}

Point CellGeometry::map(const Eigen::Vector3d& bary) const {
  return bary[0] * vertices[0] + bary[1] * vertices[1] + bary[2] * vertices[2];
}

void evaluate_shapes(int degree, const CellGeometry& geom, const Eigen::Vector3d& l,
                     ShapeValues& out) {
  const auto& g = geom.grad_bary;
  if (degree == 1) {
    out.count = 3;
    for (int i = 0; i < 3; ++i) {
      out.value[i] = l[i];
      out.grad[i] = g[i];
    }
    return;
  }
  out.count = 6;
  for (int i = 0; i < 3; ++i) {
    out.value[i] = l[i] * (2.0 * l[i] - 1.0);
    out.grad[i] = (4.0 * l[i] - 1.0) * g[i];
  }
  for (int k = 0; k < 3; ++k) {
    const int a = k, b = (k + 1) % 3;
    out.value[3 + k] = 4.0 * l[a] * l[b];
    out.grad[3 + k] = 4.0 * (l[a] * g[b] + l[b] * g[a]);
  }
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree_ != 1 && degree_ != 2) {
    throw UnsupportedError("FeSpace: only degrees 1 and 2 are supported, got " +
                           std::to_string(degree_));
  }
  const Mesh& m = *mesh_;
  const int nv = m.num_vertices();
  const int raw_count = degree_ == 1 ? nv : nv + m.num_edges();

  // Raw numbering: vertices, then edges. Interior dofs are renumbered first.
  std::vector<bool> on_boundary(raw_count);
  std::vector<Point> raw_coords(raw_count);
  for (int v = 0; v < nv; ++v) {
    on_boundary[v] = m.is_boundary_vertex(v);
    raw_coords[v] = m.vertex(v);
  }
  if (degree_ == 2) {
    for (int e = 0; e < m.num_edges(); ++e) {
      on_boundary[nv + e] = m.is_boundary_edge(e);
      const auto& [a, b] = m.edges()[e];
      raw_coords[nv + e] = 0.5 * (m.vertex(a) + m.vertex(b));
    }
  }

  std::vector<int> renumber(raw_count);
  int next = 0;
  for (int r = 0; r < raw_count; ++r) {
    if (!on_boundary[r]) renumber[r] = next++;
  }
  num_interior_ = next;
  for (int r = 0; r < raw_count; ++r) {
    if (on_boundary[r]) renumber[r] = next++;
  }

  dof_coords_.resize(raw_count);
  for (int r = 0; r < raw_count; ++r) dof_coords_[renumber[r]] = raw_coords[r];

  const int dpc = dofs_per_cell();
  cell_dofs_.resize(static_cast<std::size_t>(m.num_cells()) * dpc);
  for (int c = 0; c < m.num_cells(); ++c) {
    int* dofs = cell_dofs_.data() + static_cast<std::size_t>(c) * dpc;
    for (int k = 0; k < 3; ++k) dofs[k] = renumber[m.cells()[c][k]];
    if (degree_ == 2) {
      for (int k = 0; k < 3; ++k) dofs[3 + k] = renumber[nv + m.cell_edges(c)[k]];
    }
  }
}

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree) {
  return std::make_shared<const FeSpace>(std::move(mesh), degree);
}

std::shared_ptr<const FeSpace> build_space(Mesh mesh, int degree) {
  return build_space(std::make_shared<const Mesh>(std::move(mesh)), degree);
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& g) {
  Eigen::VectorXd coeffs(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i) coeffs[i] = g(space.dof_coords()[i]);
  return coeffs;
}

double fe_value(const FeSpace& space, const Eigen::VectorXd& coeffs, int cell,
                const Eigen::Vector3d& bary) {
  const CellGeometry geom(space.mesh(), cell);
  ShapeValues sv;
  evaluate_shapes(space.degree(), geom, bary, sv);
  const auto dofs = space.cell_dofs(cell);
  double value = 0.0;
  for (int i = 0; i < sv.count; ++i) value += coeffs[dofs[i]] * sv.value[i];
  return value;
}

Eigen::Vector2d fe_gradient(const FeSpace& space, const Eigen::VectorXd& coeffs, int cell,
                            const Eigen::Vector3d& bary) {
  const CellGeometry geom(space.mesh(), cell);
  ShapeValues sv;
  evaluate_shapes(space.degree(), geom, bary, sv);
  const auto dofs = space.cell_dofs(cell);
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  for (int i = 0; i < sv.count; ++i) grad += coeffs[dofs[i]] * sv.grad[i];
  return grad;
}

ErrorNorms error_norms(const FeSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& u,
                       const VectorField& grad_u) {
  if (coeffs.size() != space.num_dofs()) {
    throw DimensionError("error_norms: coefficient vector has wrong length");
  }
  const auto& quad = triangle_quadrature(space.volume_quadrature_degree());
  double sum0 = 0.0, sum1 = 0.0;
  ShapeValues sv;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry geom(space.mesh(), c);
    const auto dofs = space.cell_dofs(c);
    const double scale = 2.0 * geom.area;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      evaluate_shapes(space.degree(), geom, quad.points[q], sv);
      double value = 0.0;
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      for (int i = 0; i < sv.count; ++i) {
        value += coeffs[dofs[i]] * sv.value[i];
        grad += coeffs[dofs[i]] * sv.grad[i];
      }
      const Point x = geom.map(quad.points[q]);
      const double w = quad.weights[q] * scale;
      const double e = u(x) - value;
      sum0 += w * e * e;
      if (grad_u) sum1 += w * (grad_u(x) - grad).squaredNorm();
    }
  }
  return {std::sqrt(sum0), std::sqrt(sum1)};
}

double l2_norm(const FeSpace& space, const Eigen::VectorXd& coeffs) {
  return error_norms(space, coeffs, [](const Point&) { return 0.0; }, {}).l2;
}

Eigen::VectorXd join_dofs(const Eigen::VectorXd& interior, const Eigen::VectorXd& boundary) {
  Eigen::VectorXd full(interior.size() + boundary.size());
  full << interior, boundary;
  return full;
}

}  // namespace nvfem
