#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

#include "nvfem/errors.hpp"

namespace nvfem {

/// out = Op(in). `out` is resized by the callee.
using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct GmresOptions {
  double tol = 1e-10;  // relative residual target
  int restart = 50;
  int max_iterations = 1000;
};

struct SolverStats {
  int iterations = 0;
  double residual = 0.0;  // final relative residual ||b - Ax|| / ||b||
  bool converged = false;
  double seconds = 0.0;
};

/// Raised when the iteration budget is exhausted. Carries the best iterate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, SolverStats stats, Eigen::VectorXd best)
      : Error(what), stats_(stats), best_(std::move(best)) {}
  const SolverStats& stats() const { return stats_; }
  const Eigen::VectorXd& best_iterate() const { return best_; }

 private:
  SolverStats stats_;
  Eigen::VectorXd best_;
};

/// Restarted GMRES with optional right preconditioning. `x` is the initial
/// guess on entry and the final iterate on return; never throws on
/// non-convergence, inspect `converged`.
SolverStats gmres(const LinearMap& op, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  const GmresOptions& options, const LinearMap& precond = {});

/// As gmres() from a zero guess, but throws NonConvergenceError.
Eigen::VectorXd krylov_solve(const LinearMap& op, const Eigen::VectorXd& b,
                             const GmresOptions& options, SolverStats* stats = nullptr,
                             const LinearMap& precond = {});

}  // namespace nvfem
