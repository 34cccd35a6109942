#include "nvfem/linsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <limits>

#include "nvfem/errors.hpp"

namespace nvfem {

MassSolver::MassSolver(const SparseMatrix& mass) {
  direct_ = std::make_shared<Eigen::SimplicialLLT<ColMatrix>>(ColMatrix(mass));
  if (direct_->info() != Eigen::Success) {
    throw Error("MassSolver: Cholesky factorization failed");
  }
}

Eigen::VectorXd MassSolver::solve(const Eigen::VectorXd& rhs) const {
  return direct_->solve(rhs);
}

Eigen::Index BlockOperator::size() const {
  return kHessianBlocks * system_->num_dofs() + system_->num_interior();
}

void BlockOperator::apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != size()) {
    throw DimensionError("BlockOperator::apply: expected length " + std::to_string(size()) +
                         ", got " + std::to_string(v.size()));
  }
  const NvSystem& s = *system_;
  const Eigen::Index n = s.num_dofs();
  const auto u = v.tail(s.num_interior());
  out.resize(size());
  auto last = out.tail(s.num_interior());
  last.setZero();
  for (int k = 0; k < kHessianBlocks; ++k) {
    const auto h = v.segment(k * n, n);
    out.segment(k * n, n).noalias() = s.mass * h;
    out.segment(k * n, n).noalias() -= s.C[k] * u;
    last.noalias() += s.B[k] * h;
  }
}

Eigen::VectorXd BlockOperator::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out;
  apply(v, out);
  return out;
}

LinearMap BlockOperator::as_map() const {
  return [op = *this](const Eigen::VectorXd& in, Eigen::VectorXd& out) { op.apply(in, out); };
}

Eigen::VectorXd block_rhs(const NvSystem& s) {
  const Eigen::Index n = s.num_dofs();
  Eigen::VectorXd b(kHessianBlocks * n + s.num_interior());
  for (int k = 0; k < kHessianBlocks; ++k) b.segment(k * n, n) = s.Cb[k] * s.boundary;
  b.tail(s.num_interior()) = s.load;
  return b;
}

namespace {

LinearMap make_preconditioner(const NvSystem& s, Preconditioner kind) {
  const Eigen::Index n = s.num_dofs();
  const Eigen::Index ni = s.num_interior();
  switch (kind) {
    case Preconditioner::none:
      return {};
    case Preconditioner::lumped_mass: {
      const Eigen::VectorXd inv = assemble_mass(*s.space, true).diagonal().cwiseInverse();
      return [inv, n](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        out = in;
        for (int k = 0; k < kHessianBlocks; ++k) {
          out.segment(k * n, n).array() *= inv.array();
        }
      };
    }
    case Preconditioner::block_triangular: {
      auto mass = std::make_shared<MassSolver>(s.mass);
      using ColMatrix = Eigen::SparseMatrix<double>;
      auto schur = std::make_shared<Eigen::SimplicialLDLT<ColMatrix>>(ColMatrix(s.stiffness));
      if (schur->info() != Eigen::Success) {
        throw Error("block preconditioner: stiffness factorization failed");
      }
      const NvSystem* sys = &s;
      return [mass, schur, sys, n, ni](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        out.resize(in.size());
        // The Schur complement sum B M^{-1} C behaves like minus the stiffness.
        const Eigen::VectorXd u = -schur->solve(in.tail(ni));
        out.tail(ni) = u;
        for (int k = 0; k < kHessianBlocks; ++k) {
          out.segment(k * n, n) = mass->solve(in.segment(k * n, n) + sys->C[k] * u);
        }
      };
    }
  }
  return {};
}

}  // namespace

Solution nvfem_solve(const NvSystem& system, const SolveOptions& options) {
  if (system.num_interior() == 0) {
    throw DegenerateSystemError("nvfem_solve: the space has no interior dofs");
  }
  const BlockOperator op(system);
  const Eigen::VectorXd rhs = block_rhs(system);

  GmresOptions gopt;
  gopt.tol = options.tol;
  gopt.restart = options.restart;
  gopt.max_iterations =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(20 * op.size());

  Solution sol;
  const Eigen::VectorXd v = krylov_solve(op.as_map(), rhs, gopt, &sol.stats,
                                         make_preconditioner(system, options.preconditioner));
  const Eigen::Index n = system.num_dofs();
  for (int k = 0; k < kHessianBlocks; ++k) sol.hessian[k] = v.segment(k * n, n);
  sol.u_interior = v.tail(system.num_interior());
  sol.u_boundary = system.boundary;
  return sol;
}

Eigen::VectorXd dense_schur_solve(const NvSystem& system) {
  const int n = system.num_dofs();
  const int ni = system.num_interior();
  if (n > kDenseGuard) {
    throw SizeGuardError("dense_schur_solve: N = " + std::to_string(n) + " exceeds guard");
  }
  if (ni == 0) throw DegenerateSystemError("dense_schur_solve: no interior dofs");

  const Eigen::SparseMatrix<double> m = system.mass;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(m);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ni, ni);
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(ni);
  for (int k = 0; k < kHessianBlocks; ++k) {
    const Eigen::MatrixXd minv_c = chol.solve(Eigen::MatrixXd(system.C[k]));
    d += system.B[k] * minv_c;
    if (system.num_boundary() > 0) {
      lift += system.B[k] * chol.solve(system.Cb[k] * system.boundary);
    }
  }
  return d.partialPivLu().solve(system.load - lift);
}

std::array<Eigen::VectorXd, kHessianBlocks> fe_hessian(const NvSystem& system,
                                                       const Eigen::VectorXd& u_interior,
                                                       const Eigen::VectorXd& u_boundary) {
  if (u_interior.size() != system.num_interior() || u_boundary.size() != system.num_boundary()) {
    throw DimensionError("fe_hessian: coefficient vectors do not match the space");
  }
  const MassSolver mass(system.mass);
  std::array<Eigen::VectorXd, kHessianBlocks> h;
  for (int k = 0; k < kHessianBlocks; ++k) {
    h[k] = mass.solve(system.C[k] * u_interior + system.Cb[k] * u_boundary);
  }
  return h;
}

Eigen::MatrixXd dense_block_matrix(const NvSystem& system) {
  const int n = system.num_dofs();
  const int ni = system.num_interior();
  const int size = kHessianBlocks * n + ni;
  if (size > kDenseGuard) {
    throw SizeGuardError("dense_block_matrix: size " + std::to_string(size) + " exceeds guard");
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(size, size);
  const Eigen::MatrixXd m(system.mass);
  for (int k = 0; k < kHessianBlocks; ++k) {
    e.block(k * n, k * n, n, n) = m;
    e.block(k * n, kHessianBlocks * n, n, ni) = -Eigen::MatrixXd(system.C[k]);
    e.block(kHessianBlocks * n, k * n, ni, n) = Eigen::MatrixXd(system.B[k]);
  }
  return e;
}

double condition_number(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
  if (sv.size() == 0) return 1.0;
  const double smin = sv.minCoeff();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv.maxCoeff() / smin;
}

double condition_estimate(const NvSystem& system) {
  return condition_number(dense_block_matrix(system));
}

}  // namespace nvfem
