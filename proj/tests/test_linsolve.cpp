#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nvfem/errors.hpp"
#include "nvfem/gmres.hpp"
#include "nvfem/linsolve.hpp"
#include "nvfem/problems.hpp"
#include "support.hpp"

namespace nvfem {
namespace {

const double kPi = std::numbers::pi;

NvSystem system_for(ProblemId id, int n, int p) {
  const ProblemSpec prob = make_problem(id);
  return assemble_system(build_space(uniform_square_mesh(n), p), prob.coefficient_field(), prob.rhs,
                         prob.boundary);
}

LinearMap dense_map(const Eigen::MatrixXd& a) {
  return [a](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; };
}

TEST(Gmres, Identity) {
  auto rng = testing::make_rng(10);
  const Eigen::VectorXd b = testing::random_vector(rng, 30);
  SolverStats stats;
  const Eigen::VectorXd x =
      krylov_solve([](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = v; }, b, {}, &stats);
  EXPECT_EQ(stats.iterations, 1);
  EXPECT_TRUE(stats.converged);
  EXPECT_LE((x - b).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gmres, Diagonal) {
  const int k = 40;
  Eigen::VectorXd d(k);
  for (int i = 0; i < k; ++i) d[i] = i + 1;
  SolverStats stats;
  GmresOptions opts;
  opts.restart = 10;
  const Eigen::VectorXd x = krylov_solve(
      [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = d.cwiseProduct(v); },
      Eigen::VectorXd::Ones(k), opts, &stats);
  for (int i = 0; i < k; ++i) EXPECT_NEAR(x[i], 1.0 / (i + 1), 1e-9);
  EXPECT_LE(stats.residual, opts.tol);
}

TEST(Gmres, RandomNonsymmetricWithRestarts) {
  auto rng = testing::make_rng(11);
  const int k = 60;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k) * 4.0;
  for (int i = 0; i < k; ++i) a.row(i) += testing::random_vector(rng, k, 0.3).transpose();
  const Eigen::VectorXd b = testing::random_vector(rng, k);
  for (int restart : {5, 20, 100}) {
    GmresOptions opts;
    opts.restart = restart;
    SolverStats stats;
    const Eigen::VectorXd x = krylov_solve(dense_map(a), b, opts, &stats);
    EXPECT_LE((a * x - b).norm() / b.norm(), 1e-10);
    EXPECT_LE(stats.residual, opts.tol);
  }
}

TEST(Gmres, RightPreconditionerSolvesSameSystem) {
  auto rng = testing::make_rng(12);
  const int k = 50;
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(k, k) * 0.1;
  for (int i = 0; i < k; ++i) a(i, i) += 1.0 + i;
  const Eigen::VectorXd b = testing::random_vector(rng, k);
  const Eigen::VectorXd diag = a.diagonal();
  SolverStats plain, pre;
  const Eigen::VectorXd x0 = krylov_solve(dense_map(a), b, {}, &plain);
  const Eigen::VectorXd x1 = krylov_solve(dense_map(a), b, {}, &pre,
                                          [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) {
                                            y = v.cwiseQuotient(diag);
                                          });
  EXPECT_LE((x0 - x1).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(pre.iterations, plain.iterations);
}

TEST(Gmres, ZeroRhs) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
  const SolverStats s = gmres(dense_map(Eigen::MatrixXd::Identity(5, 5)), Eigen::VectorXd::Zero(5), x, {});
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(x, Eigen::VectorXd::Zero(5));
}

TEST(Gmres, NonConvergenceCarriesBestIterate) {
  // rotation: GMRES with restart 1 stagnates
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, -1, 0;
  GmresOptions opts;
  opts.restart = 1;
  opts.max_iterations = 20;
  const Eigen::VectorXd b = Eigen::VectorXd::Unit(2, 0);
  try {
    krylov_solve(dense_map(a), b, opts);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_FALSE(e.stats().converged);
    EXPECT_EQ(e.best_iterate().size(), 2);
    EXPECT_GT(e.stats().residual, opts.tol);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  EXPECT_FALSE(gmres(dense_map(a), b, x, opts).converged);
}

TEST(BlockOperator, MatchesDenseMatrix) {
  for (int p : {1, 2}) {
    const NvSystem sys = system_for(ProblemId::test41, 2, p);
    const BlockOperator op(sys);
    const Eigen::MatrixXd e = dense_block_matrix(sys);
    ASSERT_EQ(e.rows(), op.size());
    ASSERT_EQ(op.size(), 4 * sys.num_dofs() + sys.num_interior());
    auto rng = testing::make_rng(20 + p);
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd v = testing::random_vector(rng, op.size());
      EXPECT_LE((op.apply(v) - e * v).cwiseAbs().maxCoeff(), 1e-13);
    }
    // u = 0: mass rows and the sum of B blocks
    Eigen::VectorXd v = testing::random_vector(rng, op.size());
    v.tail(sys.num_interior()).setZero();
    const Eigen::VectorXd out = op.apply(v);
    const int n = sys.num_dofs();
    Eigen::VectorXd last = Eigen::VectorXd::Zero(sys.num_interior());
    for (int k = 0; k < kHessianBlocks; ++k) {
      EXPECT_LE((out.segment(k * n, n) - sys.mass * v.segment(k * n, n)).cwiseAbs().maxCoeff(), 1e-14);
      last += sys.B[k] * v.segment(k * n, n);
    }
    EXPECT_LE((out.tail(sys.num_interior()) - last).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(BlockOperator, Linearity) {
  for (int p : {1, 2}) {
    const NvSystem sys = system_for(ProblemId::test42, 4, p);
    const BlockOperator op(sys);
    auto rng = testing::make_rng(30 + p);
    EXPECT_EQ(op.apply(Eigen::VectorXd::Zero(op.size())), Eigen::VectorXd::Zero(op.size()));
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd v = testing::random_vector(rng, op.size());
      const Eigen::VectorXd w = testing::random_vector(rng, op.size());
      const double a = std::uniform_real_distribution<double>(-3, 3)(rng);
      const double b = std::uniform_real_distribution<double>(-3, 3)(rng);
      const Eigen::VectorXd lhs = op.apply(a * v + b * w);
      const Eigen::VectorXd rhs = a * op.apply(v) + b * op.apply(w);
      EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(BlockOperator, DimensionMismatch) {
  const NvSystem sys = system_for(ProblemId::test41, 2, 1);
  const BlockOperator op(sys);
  EXPECT_THROW(op.apply(Eigen::VectorXd::Zero(op.size() - 1)), DimensionError);
}

TEST(NvfemSolve, AgreesWithDenseSchur) {
  for (int n : {2, 4, 8}) {
    for (auto pc : {Preconditioner::none, Preconditioner::lumped_mass, Preconditioner::block_triangular}) {
      const NvSystem sys = system_for(ProblemId::test41, n, 1);
      SolveOptions opts;
      opts.preconditioner = pc;
      const Solution sol = nvfem_solve(sys, opts);
      EXPECT_LE((sol.u_interior - dense_schur_solve(sys)).cwiseAbs().maxCoeff(), 1e-8)
          << "n=" << n << " preconditioner " << static_cast<int>(pc);
      EXPECT_TRUE(sol.stats.converged);
      EXPECT_LE(sol.stats.residual, opts.tol);
    }
  }
}

TEST(NvfemSolve, AgreesWithDenseSchurP2AndLift) {
  for (auto id : {ProblemId::test42, ProblemId::test43}) {
    const NvSystem sys = system_for(id, 4, 2);
    EXPECT_LE((nvfem_solve(sys).u_interior - dense_schur_solve(sys)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(NvfemSolve, ScalarSystem) {
  const NvSystem sys = system_for(ProblemId::test41, 2, 1);
  ASSERT_EQ(sys.num_interior(), 1);
  // D = sum B M^-1 C, a 1x1 matrix
  const Eigen::MatrixXd m = Eigen::MatrixXd(sys.mass);
  double d = 0.0;
  for (int k = 0; k < kHessianBlocks; ++k) {
    d += (Eigen::MatrixXd(sys.B[k]) * m.ldlt().solve(Eigen::MatrixXd(sys.C[k])))(0, 0);
  }
  EXPECT_NEAR(nvfem_solve(sys).u_interior[0], sys.load[0] / d, 1e-12);
}

TEST(NvfemSolve, ResidualRoundTrip) {
  const NvSystem sys = system_for(ProblemId::test43, 6, 1);
  SolveOptions opts;
  const Solution sol = nvfem_solve(sys, opts);
  Eigen::VectorXd v(BlockOperator(sys).size());
  const int n = sys.num_dofs();
  for (int k = 0; k < kHessianBlocks; ++k) v.segment(k * n, n) = sol.hessian[k];
  v.tail(sys.num_interior()) = sol.u_interior;
  const Eigen::VectorXd b = block_rhs(sys);
  EXPECT_LE((BlockOperator(sys).apply(v) - b).norm(), 10 * opts.tol * b.norm());
  EXPECT_EQ(sol.u_boundary, sys.boundary);
}

TEST(NvfemSolve, HessianConsistency) {
  const NvSystem sys = system_for(ProblemId::test43, 6, 2);
  SolveOptions opts;
  const Solution sol = nvfem_solve(sys, opts);
  for (int k = 0; k < kHessianBlocks; ++k) {
    const Eigen::VectorXd r = sys.C[k] * sol.u_interior + sys.Cb[k] * sol.u_boundary;
    const Eigen::VectorXd lhs = sys.mass * sol.hessian[k];
    EXPECT_LE((lhs - r).norm(), 10 * opts.tol * std::max(1.0, block_rhs(sys).norm()));
  }
}

TEST(NvfemSolve, HomogeneousProblem) {
  const auto s = build_space(uniform_square_mesh(4), 2);
  const NvSystem sys = assemble_system(s, constant_coefficient(Mat2::Identity()),
                                       [](const Point&) { return 0.0; }, {});
  const Solution sol = nvfem_solve(sys);
  EXPECT_EQ(sol.u_interior, Eigen::VectorXd::Zero(sys.num_interior()));
  for (const auto& h : sol.hessian) EXPECT_EQ(h, Eigen::VectorXd::Zero(sys.num_dofs()));
}

TEST(NvfemSolve, LinearInLoad) {
  const auto s = build_space(uniform_square_mesh(5), 1);
  const auto a = make_problem(ProblemId::test41).coefficient_field();
  const ScalarField f1 = [](const Point& x) { return std::exp(x.x()); };
  const ScalarField f2 = [](const Point& x) { return x.y() * x.y() - 3.0; };
  SolveOptions opts;
  const Eigen::VectorXd u1 = nvfem_solve(assemble_system(s, a, f1, {}), opts).u_interior;
  const Eigen::VectorXd u2 = nvfem_solve(assemble_system(s, a, f2, {}), opts).u_interior;
  const Eigen::VectorXd u12 = nvfem_solve(
      assemble_system(s, a, [&](const Point& x) { return f1(x) + f2(x); }, {}), opts).u_interior;
  EXPECT_LE((u12 - u1 - u2).norm(), 10 * opts.tol * u12.norm());
}

TEST(NvfemSolve, PoissonReduction) {
  // A = I agrees with the standard stiffness solve to discretization accuracy
  const ScalarField u = [](const Point& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
  const ProblemSpec poisson = make_problem(ProblemId::poisson);
  const auto s = build_space(uniform_square_mesh(16), 1);
  const NvSystem sys = assemble_system(s, poisson.coefficient_field(), poisson.rhs, {});
  const Eigen::VectorXd nv = nvfem_solve(sys).coefficients();
  const Eigen::VectorXd fem = standard_fem_solve(poisson, *s);
  const double e_nv = error_norms(*s, nv, u, {}).l2, e_fem = error_norms(*s, fem, u, {}).l2;
  EXPECT_LT(e_nv, 0.05);
  EXPECT_LT(e_fem, 0.05);
  EXPECT_LT(l2_norm(*s, nv - fem), 2 * std::max(e_nv, e_fem));
}

TEST(NvfemSolve, Degenerate) {
  const NvSystem sys = system_for(ProblemId::test41, 1, 1);
  EXPECT_THROW(nvfem_solve(sys), DegenerateSystemError);
}

TEST(NvfemSolve, IterationBudget) {
  const NvSystem sys = system_for(ProblemId::test41, 8, 1);
  SolveOptions opts;
  opts.preconditioner = Preconditioner::none;
  opts.max_iterations = 3;
  EXPECT_THROW(nvfem_solve(sys, opts), NonConvergenceError);
}

TEST(NvfemSolve, LumpedPreconditionerNeedsP1) {
  SolveOptions opts;
  opts.preconditioner = Preconditioner::lumped_mass;
  EXPECT_THROW(nvfem_solve(system_for(ProblemId::test41, 2, 2), opts), UnsupportedError);
}

class HessianIdentity : public ::testing::TestWithParam<int> {};

TEST_P(HessianIdentity, IntegralEqualsBoundaryFlux) {
  const NvSystem sys = system_for(ProblemId::test41, 4, GetParam());
  const FeSpace& s = *sys.space;
  auto rng = testing::make_rng(40 + GetParam());
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd ui = testing::random_vector(rng, s.num_interior());
    const Eigen::VectorXd ub = Eigen::VectorXd::Zero(s.num_boundary());
    const auto h = fe_hessian(sys, ui, ub);
    const Eigen::VectorXd full = join_dofs(ui, ub);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double lhs = (sys.mass * h[hessian_block(a, b)]).sum();
        EXPECT_NEAR(lhs, testing::boundary_flux(s, full, a, b), 1e-9);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Degrees, HessianIdentity, ::testing::Values(1, 2));

TEST(FeHessian, QuadraticIntegral) {
  const auto s = build_space(uniform_square_mesh(4), 2);
  const NvSystem sys = assemble_system(s, constant_coefficient(Mat2::Identity()),
                                       [](const Point&) { return 0.0; }, {});
  const Eigen::VectorXd v = interpolate(*s, [](const Point& x) { return x.x() * x.x(); });
  const auto h = fe_hessian(sys, v.head(s->num_interior()), v.tail(s->num_boundary()));
  EXPECT_NEAR((sys.mass * h[hessian_block(0, 0)]).sum(), 8.0, 1e-12);
  // P2 reproduces the quadratic, so the discrete Hessian is exact
  EXPECT_LE((h[hessian_block(0, 0)].array() - 2.0).abs().maxCoeff(), 1e-10);
  EXPECT_LE(h[hessian_block(1, 1)].cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(h[hessian_block(0, 1)].cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FeHessian, ZeroAndErrors) {
  const NvSystem sys = system_for(ProblemId::test41, 3, 1);
  const auto h = fe_hessian(sys, Eigen::VectorXd::Zero(sys.num_interior()),
                            Eigen::VectorXd::Zero(sys.num_boundary()));
  for (const auto& hk : h) EXPECT_EQ(hk, Eigen::VectorXd::Zero(sys.num_dofs()));
  EXPECT_THROW(fe_hessian(sys, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(sys.num_boundary())),
               DimensionError);
}

TEST(Condition, Basics) {
  EXPECT_NEAR(condition_number(Eigen::MatrixXd::Identity(7, 7)), 1.0, 1e-14);
  auto rng = testing::make_rng(50);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(20, 20) * 3.0;
  a += Eigen::MatrixXd::NullaryExpr(20, 20, [&] { return testing::random_vector(rng, 1)[0]; });
  const double k = condition_number(a);
  EXPECT_GT(k, 1.0);
  EXPECT_NEAR(condition_number(-2.5 * a), k, 1e-10 * k);
  const NvSystem sys = system_for(ProblemId::test41, 4, 1);
  EXPECT_GT(condition_estimate(sys), 1.0);
}

TEST(Guards, DenseWorkRefusedWhenLarge) {
  const NvSystem sys = system_for(ProblemId::test41, 72, 1);  // N = 5329
  EXPECT_GT(sys.num_dofs(), kDenseGuard);
  EXPECT_THROW(dense_schur_solve(sys), SizeGuardError);
  EXPECT_THROW(condition_estimate(sys), SizeGuardError);
  EXPECT_THROW(condition_estimate(system_for(ProblemId::test41, 32, 1)), SizeGuardError);
}

}  // namespace
}  // namespace nvfem
