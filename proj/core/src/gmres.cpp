#include "nvfem/gmres.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace nvfem {

namespace {

// Givens rotation zeroing b in (a, b).
void make_rotation(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
  } else {
    const double r = std::hypot(a, b);
    c = a / r;
    s = b / r;
  }
}

}  // namespace

SolverStats gmres(const LinearMap& op, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  const GmresOptions& options, const LinearMap& precond) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = b.size();
  const int m = std::max(1, options.restart);
  SolverStats stats;

  auto finish = [&](SolverStats s) {
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return s;
  };

  if (x.size() != n) x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    stats.converged = true;
    return finish(stats);
  }
  const double target = options.tol * bnorm;

  Eigen::VectorXd r(n), w(n), z(n);
  op(x, w);
  r = b - w;
  double beta = r.norm();
  Eigen::VectorXd best = x;
  double best_residual = beta;

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd Z;
  if (precond) Z.resize(n, m);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> cs(m), sn(m);
  Eigen::VectorXd g(m + 1);

  while (beta > target && stats.iterations < options.max_iterations) {
    V.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int k = 0;
    for (; k < m && stats.iterations < options.max_iterations; ++k) {
      if (precond) {
        precond(V.col(k), z);
        Z.col(k) = z;
        op(z, w);
      } else {
        op(V.col(k), w);
      }
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V.col(i));
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double sub = H(k + 1, k);
      make_rotation(H(k, k), sub, cs[k], sn[k]);
      H(k, k) = cs[k] * H(k, k) + sn[k] * sub;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++stats.iterations;
      if (std::abs(g[k + 1]) <= target || sub == 0.0) {
        ++k;
        break;
      }
      V.col(k + 1) = w / sub;
    }

    const Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    if (precond) {
      x += Z.leftCols(k) * y;
    } else {
      x += V.leftCols(k) * y;
    }
    op(x, w);
    r = b - w;
    beta = r.norm();
    if (beta < best_residual) {
      best_residual = beta;
      best = x;
    }
  }

  x = best;
  stats.residual = best_residual / bnorm;
  stats.converged = best_residual <= target;
  return finish(stats);
}

Eigen::VectorXd krylov_solve(const LinearMap& op, const Eigen::VectorXd& b,
                             const GmresOptions& options, SolverStats* stats,
                             const LinearMap& precond) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  const SolverStats s = gmres(op, b, x, options, precond);
  if (stats) *stats = s;
  if (!s.converged) {
    throw NonConvergenceError("GMRES did not converge: " + std::to_string(s.iterations) +
                                  " iterations, relative residual " + std::to_string(s.residual),
                              s, std::move(x));
  }
  return x;
}

}  // namespace nvfem
