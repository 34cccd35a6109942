#pragma once

#include <array>
#include <memory>
#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "nvfem/assembly.hpp"
#include "nvfem/gmres.hpp"

namespace nvfem {

/// Dense work (Schur oracle, condition numbers) refuses systems past this.
inline constexpr int kDenseGuard = 5000;

/// Solves M x = r with the consistent mass matrix (sparse Cholesky,
/// factored once).
class MassSolver {
 public:
  explicit MassSolver(const SparseMatrix& mass);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  using ColMatrix = Eigen::SparseMatrix<double>;
  std::shared_ptr<Eigen::SimplicialLLT<ColMatrix>> direct_;
};

/// Matrix-free view of the (d^2+1)x(d^2+1) block matrix
///
///   [ M           -C_11 ]
///   [    ...       ...  ]
///   [        M    -C_22 ]
///   [ B^11 .. B^22   0  ]
///
/// acting on v = (h_11, h_12, h_21, h_22, u).
class BlockOperator {
 public:
  explicit BlockOperator(const NvSystem& system) : system_(&system) {}

  Eigen::Index size() const;
  void apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  LinearMap as_map() const;

 private:
  const NvSystem* system_;
};

enum class Preconditioner {
  none,
  /// Block diagonal: lumped-mass inverse on the Hessian blocks, identity on u (P1 only).
  lumped_mass,
  /// Block upper triangular: exact mass solves on the Hessian blocks and
  /// the divergence-form stiffness matrix as Schur complement approximation.
  block_triangular,
};

struct SolveOptions {
  double tol = 1e-10;
  int restart = 50;
  int max_iterations = 0;  // 0: 20 * (d^2 N + N_interior)
  Preconditioner preconditioner = Preconditioner::block_triangular;
};

struct Solution {
  Eigen::VectorXd u_interior;
  Eigen::VectorXd u_boundary;
  std::array<Eigen::VectorXd, kHessianBlocks> hessian;
  SolverStats stats;

  /// Full length-N coefficient vector.
  Eigen::VectorXd coefficients() const { return join_dofs(u_interior, u_boundary); }
};

/// Right-hand side of the block system with the Dirichlet lift applied:
/// (0,...,0,f) - E_bdry (0,...,0,g).
Eigen::VectorXd block_rhs(const NvSystem& system);

/// Solves the block system by GMRES on BlockOperator. Throws
/// DegenerateSystemError when there are no interior dofs and
/// NonConvergenceError when GMRES fails.
Solution nvfem_solve(const NvSystem& system, const SolveOptions& options = {});

/// Forms D = sum B^{ab} M^{-1} C_ab densely and solves D u = f - lift.
Eigen::VectorXd dense_schur_solve(const NvSystem& system);

/// h_ab = M^{-1} (C_ab u_interior + Cb_ab u_boundary).
std::array<Eigen::VectorXd, kHessianBlocks> fe_hessian(const NvSystem& system,
                                                       const Eigen::VectorXd& u_interior,
                                                       const Eigen::VectorXd& u_boundary);

/// Dense copy of the block matrix (guarded by kDenseGuard).
Eigen::MatrixXd dense_block_matrix(const NvSystem& system);

/// Ratio of extreme singular values.
double condition_number(const Eigen::MatrixXd& a);

/// condition_number(dense_block_matrix(system)).
double condition_estimate(const NvSystem& system);

}  // namespace nvfem
