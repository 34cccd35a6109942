#include "nvfem/assembly.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "nvfem/errors.hpp"
#include "nvfem/quadrature.hpp"

namespace nvfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void check_index(int alpha, int beta) {
  if (alpha < 0 || alpha >= kDim || beta < 0 || beta >= kDim) {
    throw std::out_of_range("Hessian component index out of range");
  }
}

// Calls visit(cell, geom, dofs, weight, shapes, eval_point) for every volume
// quadrature point, in fixed traversal order.
template <class Visit>
void for_each_quadrature_point(const FeSpace& space, Visit&& visit) {
  const auto& quad = triangle_quadrature(space.volume_quadrature_degree());
  ShapeValues sv;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry geom(space.mesh(), c);
    const auto dofs = space.cell_dofs(c);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      evaluate_shapes(space.degree(), geom, quad.points[q], sv);
      const EvalPoint at{geom.map(quad.points[q]), c, quad.points[q]};
      visit(dofs, quad.weights[q] * 2.0 * geom.area, sv, at);
    }
  }
}

std::array<HessianOperator, kHessianBlocks> assemble_C_blocks(const FeSpace& space) {
  const int ni = space.num_interior();
  std::array<Triplets, kHessianBlocks> ti, tb;

  auto push = [&](int block, int row, int col, double value) {
    if (col < ni) {
      ti[block].emplace_back(row, col, value);
    } else {
      tb[block].emplace_back(row, col - ni, value);
    }
  };

  for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                       const ShapeValues& sv, const EvalPoint&) {
    for (int i = 0; i < sv.count; ++i) {
      for (int j = 0; j < sv.count; ++j) {
        for (int a = 0; a < kDim; ++a) {
          for (int b = 0; b < kDim; ++b) {
            push(hessian_block(a, b), dofs[i], dofs[j], -w * sv.grad[i][b] * sv.grad[j][a]);
          }
        }
      }
    }
  });

  // Boundary term, using traces from the owning cell.
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature(space.edge_quadrature_degree());
  ShapeValues sv;
  for (const auto& be : mesh.boundary_edges()) {
    const CellGeometry geom(mesh, be.cell);
    const auto dofs = space.cell_dofs(be.cell);
    const double length = (mesh.vertex(be.vertices[1]) - mesh.vertex(be.vertices[0])).norm();
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      Eigen::Vector3d bary = Eigen::Vector3d::Zero();
      bary[be.local_edge] = 1.0 - quad.points[q];
      bary[(be.local_edge + 1) % 3] = quad.points[q];
      evaluate_shapes(space.degree(), geom, bary, sv);
      const double w = quad.weights[q] * length;
      for (int i = 0; i < sv.count; ++i) {
        if (sv.value[i] == 0.0) continue;
        for (int j = 0; j < sv.count; ++j) {
          for (int a = 0; a < kDim; ++a) {
            for (int b = 0; b < kDim; ++b) {
              push(hessian_block(a, b), dofs[i], dofs[j],
                   w * sv.value[i] * be.normal[b] * sv.grad[j][a]);
            }
          }
        }
      }
    }
  }

  std::array<HessianOperator, kHessianBlocks> out;
  for (int k = 0; k < kHessianBlocks; ++k) {
    out[k].interior = from_triplets(space.num_dofs(), ni, ti[k]);
    out[k].boundary = from_triplets(space.num_dofs(), space.num_boundary(), tb[k]);
  }
  return out;
}

}  // namespace

CoefficientField constant_coefficient(const Mat2& a) {
  return [a](const EvalPoint&) { return a; };
}

SparseMatrix assemble_mass(const FeSpace& space, bool lumped) {
  if (lumped && space.degree() != 1) {
    throw UnsupportedError("assemble_mass: mass lumping is only available for P1");
  }
  const int n = space.num_dofs();
  Triplets t;
  if (lumped) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                         const ShapeValues& sv, const EvalPoint&) {
      for (int i = 0; i < sv.count; ++i) {
        for (int j = 0; j < sv.count; ++j) diag[dofs[i]] += w * sv.value[i] * sv.value[j];
      }
    });
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, diag[i]);
    return from_triplets(n, n, t);
  }
  for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                       const ShapeValues& sv, const EvalPoint&) {
    for (int i = 0; i < sv.count; ++i) {
      for (int j = 0; j < sv.count; ++j) {
        t.emplace_back(dofs[i], dofs[j], w * sv.value[i] * sv.value[j]);
      }
    }
  });
  return from_triplets(n, n, t);
}

std::array<SparseMatrix, kHessianBlocks> assemble_B_blocks(const FeSpace& space,
                                                           const CoefficientField& a) {
  const int ni = space.num_interior();
  std::array<Triplets, kHessianBlocks> t;
  for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                       const ShapeValues& sv, const EvalPoint& at) {
    const Mat2 coeff = a(at);
    for (int i = 0; i < sv.count; ++i) {
      if (dofs[i] >= ni) continue;
      for (int j = 0; j < sv.count; ++j) {
        const double base = w * sv.value[i] * sv.value[j];
        for (int al = 0; al < kDim; ++al) {
          for (int be = 0; be < kDim; ++be) {
            t[hessian_block(al, be)].emplace_back(dofs[i], dofs[j], base * coeff(al, be));
          }
        }
      }
    }
  });
  std::array<SparseMatrix, kHessianBlocks> out;
  for (int k = 0; k < kHessianBlocks; ++k) out[k] = from_triplets(ni, space.num_dofs(), t[k]);
  return out;
}

SparseMatrix assemble_B(const FeSpace& space, const CoefficientField& a, int alpha, int beta) {
  check_index(alpha, beta);
  const int ni = space.num_interior();
  Triplets t;
  for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                       const ShapeValues& sv, const EvalPoint& at) {
    const double coeff = a(at)(alpha, beta);
    for (int i = 0; i < sv.count; ++i) {
      if (dofs[i] >= ni) continue;
      for (int j = 0; j < sv.count; ++j) {
        t.emplace_back(dofs[i], dofs[j], w * sv.value[i] * sv.value[j] * coeff);
      }
    }
  });
  return from_triplets(ni, space.num_dofs(), t);
}

HessianOperator assemble_C(const FeSpace& space, int alpha, int beta) {
  check_index(alpha, beta);
  auto blocks = assemble_C_blocks(space);
  return std::move(blocks[hessian_block(alpha, beta)]);
}

Eigen::VectorXd assemble_load(const FeSpace& space, const ScalarField& f) {
  const int ni = space.num_interior();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(ni);
  for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                       const ShapeValues& sv, const EvalPoint& at) {
    const double fx = f(at.x);
    for (int i = 0; i < sv.count; ++i) {
      if (dofs[i] < ni) load[dofs[i]] += w * fx * sv.value[i];
    }
  });
  return load;
}

Eigen::VectorXd boundary_values(const FeSpace& space, const ScalarField& g) {
  const int ni = space.num_interior();
  Eigen::VectorXd values(space.num_boundary());
  for (int j = 0; j < space.num_boundary(); ++j) values[j] = g(space.dof_coords()[ni + j]);
  return values;
}

SparseMatrix assemble_stiffness(const FeSpace& space, const CoefficientField& a) {
  const int ni = space.num_interior();
  Triplets t;
  for_each_quadrature_point(space, [&](std::span<const int> dofs, double w,
                                       const ShapeValues& sv, const EvalPoint& at) {
    const Mat2 coeff = a(at);
    for (int i = 0; i < sv.count; ++i) {
      if (dofs[i] >= ni) continue;
      for (int j = 0; j < sv.count; ++j) {
        if (dofs[j] >= ni) continue;
        t.emplace_back(dofs[i], dofs[j], w * sv.grad[i].dot(coeff * sv.grad[j]));
      }
    }
  });
  return from_triplets(ni, ni, t);
}

NvSystem assemble_system(std::shared_ptr<const FeSpace> space, const CoefficientField& a,
                         const ScalarField& f, const ScalarField& g) {
  NvSystem sys;
  sys.space = std::move(space);
  const FeSpace& s = *sys.space;
  sys.mass = assemble_mass(s);
  auto c = assemble_C_blocks(s);
  for (int k = 0; k < kHessianBlocks; ++k) {
    sys.C[k] = std::move(c[k].interior);
    sys.Cb[k] = std::move(c[k].boundary);
  }
  sys.load = assemble_load(s, f);
  sys.boundary = g ? boundary_values(s, g) : Eigen::VectorXd::Zero(s.num_boundary());
  update_coefficient(sys, a);
  return sys;
}

void update_coefficient(NvSystem& system, const CoefficientField& a) {
  system.B = assemble_B_blocks(*system.space, a);
  system.stiffness = assemble_stiffness(*system.space, a);
}

void write_coordinate(std::ostream& out, const SparseMatrix& m) {
  const auto old_precision = out.precision(17);
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  out.precision(old_precision);
}

void write_coordinate(const std::filesystem::path& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_coordinate: cannot open " + path.string());
  write_coordinate(out, m);
}

}  // namespace nvfem
