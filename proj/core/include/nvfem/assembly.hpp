#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nvfem/fespace.hpp"

namespace nvfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Mat2 = Eigen::Matrix2d;

inline constexpr int kDim = 2;
inline constexpr int kHessianBlocks = kDim * kDim;

/// Row-major position of Hessian component (alpha, beta), 0-based.
constexpr int hessian_block(int alpha, int beta) { return alpha * kDim + beta; }

/// Where a coefficient is being evaluated. `cell` and `bary` let
/// solution-dependent coefficients (the quasilinear iteration) evaluate FE
/// gradients at the same point.
struct EvalPoint {
  Point x;
  int cell = -1;
  Eigen::Vector3d bary;
};

/// Symmetric coefficient matrix A(x). Ellipticity is assumed, not checked.
using CoefficientField = std::function<Mat2(const EvalPoint&)>;

CoefficientField constant_coefficient(const Mat2& a);

/// M_ij = (Phi_i, Phi_j). With `lumped` the row sums are placed on the
/// diagonal (P1 only; UnsupportedError otherwise).
SparseMatrix assemble_mass(const FeSpace& space, bool lumped = false);

/// B^{ab}_ij = (interior Phi_i, A_ab Phi_j): N_interior x N.
SparseMatrix assemble_B(const FeSpace& space, const CoefficientField& a, int alpha, int beta);

/// All four B blocks with a single coefficient evaluation per quadrature point.
std::array<SparseMatrix, kHessianBlocks> assemble_B_blocks(const FeSpace& space,
                                                           const CoefficientField& a);

/// Column blocks of the finite element Hessian operator
///   -(d_b Phi_i, d_a Phi_j) + <Phi_i n_b, d_a Phi_j>_{boundary},
/// split by trial dof: `interior` is N x N_interior, `boundary` N x N_boundary.
struct HessianOperator {
  SparseMatrix interior;
  SparseMatrix boundary;
};

HessianOperator assemble_C(const FeSpace& space, int alpha, int beta);

/// f_i = (f, interior Phi_i).
Eigen::VectorXd assemble_load(const FeSpace& space, const ScalarField& f);

/// Nodal values of g at the boundary dofs (length N_boundary).
Eigen::VectorXd boundary_values(const FeSpace& space, const ScalarField& g);

/// K_ij = (A grad Phi_j, grad Phi_i) over interior dofs (N_interior square).
SparseMatrix assemble_stiffness(const FeSpace& space, const CoefficientField& a);

/// Every component of the nonvariational system on one space.
///
/// `stiffness` is not part of the discrete method; it is the divergence-form
/// operator with the same coefficient and serves as a Schur-complement
/// approximation for preconditioning.
struct NvSystem {
  std::shared_ptr<const FeSpace> space;
  SparseMatrix mass;
  std::array<SparseMatrix, kHessianBlocks> B;
  std::array<SparseMatrix, kHessianBlocks> C;
  std::array<SparseMatrix, kHessianBlocks> Cb;
  Eigen::VectorXd load;
  Eigen::VectorXd boundary;
  SparseMatrix stiffness;

  int num_dofs() const { return space->num_dofs(); }
  int num_interior() const { return space->num_interior(); }
  int num_boundary() const { return space->num_boundary(); }
};

NvSystem assemble_system(std::shared_ptr<const FeSpace> space, const CoefficientField& a,
                         const ScalarField& f, const ScalarField& g);

/// Reassembles only the coefficient-dependent parts (B and the stiffness
/// approximation); M, C and Cb are coefficient independent.
void update_coefficient(NvSystem& system, const CoefficientField& a);

/// Coordinate text dump: one `row col value` line per stored entry.
void write_coordinate(std::ostream& out, const SparseMatrix& m);
void write_coordinate(const std::filesystem::path& path, const SparseMatrix& m);

}  // namespace nvfem
