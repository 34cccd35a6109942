#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "nvfem/assembly.hpp"
#include "nvfem/errors.hpp"
#include "support.hpp"

namespace nvfem {
namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

// Index of the dof sitting at -x, found by coordinate lookup.
std::vector<int> point_reflection(const FeSpace& s) {
  std::map<std::pair<long, long>, int> at;
  auto key = [](const Point& x) {
    return std::make_pair(std::lround(x.x() * 1e9), std::lround(x.y() * 1e9));
  };
  for (int i = 0; i < s.num_dofs(); ++i) at[key(s.dof_coords()[i])] = i;
  std::vector<int> out(s.num_dofs());
  for (int i = 0; i < s.num_dofs(); ++i) out[i] = at.at(key(-s.dof_coords()[i]));
  return out;
}

TEST(Mass, ReferenceTriangle) {
  const auto s = build_space(Mesh({{0, 0}, {1, 0}, {0, 1}}, {Cell{0, 1, 2}}), 1);
  const Eigen::MatrixXd m = dense(assemble_mass(*s));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m(i, j), i == j ? 1.0 / 12 : 1.0 / 24, 1e-16);
  }
}

TEST(Mass, RowSumsAreBasisIntegrals) {
  const auto s = build_space(uniform_square_mesh(4), 1);
  const Mesh& mesh = s->mesh();
  std::vector<double> expected(s->num_dofs(), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int d : s->cell_dofs(c)) expected[d] += mesh.area(c) / 3.0;
  }
  const Eigen::VectorXd rows = dense(assemble_mass(*s)).rowwise().sum();
  for (int i = 0; i < s->num_dofs(); ++i) EXPECT_NEAR(rows[i], expected[i], 1e-14);
  // an interior vertex of the uniform mesh touches six cells of area (2/n)^2/2
  EXPECT_NEAR(rows[0], 6 * 0.125 / 3, 1e-15);
}

TEST(Mass, Lumped) {
  const auto s = build_space(uniform_square_mesh(5), 1);
  const Eigen::MatrixXd full = dense(assemble_mass(*s));
  const Eigen::MatrixXd lumped = dense(assemble_mass(*s, true));
  EXPECT_TRUE(lumped.isDiagonal());
  EXPECT_LE((lumped.diagonal() - full.rowwise().sum()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(lumped.trace(), 4.0, 1e-13);
  EXPECT_THROW(assemble_mass(*build_space(uniform_square_mesh(2), 2), true), UnsupportedError);
}

class MassSpd : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(MassSpd, SymmetricPositiveDefinite) {
  const auto s = build_space(uniform_square_mesh(std::get<0>(GetParam())), std::get<1>(GetParam()));
  ASSERT_LE(s->num_dofs(), 100);
  const Eigen::MatrixXd m = dense(assemble_mass(*s));
  EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-13 * m.cwiseAbs().maxCoeff());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  // partition of unity: total of all entries is the domain area
  EXPECT_NEAR(m.sum(), 4.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Small, MassSpd,
                         ::testing::Values(std::make_tuple(1, 1), std::make_tuple(3, 1),
                                           std::make_tuple(8, 1), std::make_tuple(2, 2),
                                           std::make_tuple(4, 2)));

TEST(B, IdentityCoefficientIsMassSlice) {
  for (int p : {1, 2}) {
    const auto s = build_space(uniform_square_mesh(3), p);
    const auto id = constant_coefficient(Mat2::Identity());
    const Eigen::MatrixXd m = dense(assemble_mass(*s));
    for (int a = 0; a < 2; ++a) {
      const Eigen::MatrixXd b = dense(assemble_B(*s, id, a, a));
      ASSERT_EQ(b.rows(), s->num_interior());
      ASSERT_EQ(b.cols(), s->num_dofs());
      EXPECT_LE((b - m.topRows(s->num_interior())).cwiseAbs().maxCoeff(), 1e-15);
    }
    EXPECT_EQ(dense(assemble_B(*s, id, 0, 1)).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(B, SingleInteriorDof) {
  const auto s = build_space(uniform_square_mesh(2), 1);
  const Eigen::MatrixXd b =
      dense(assemble_B(*s, constant_coefficient(Mat2::Identity()), 0, 0));
  ASSERT_EQ(b.rows(), 1);
  ASSERT_EQ(b.cols(), 9);
  EXPECT_NEAR(b(0, 0), 6 * 0.5 / 6, 1e-15);
  EXPECT_NEAR(b.sum(), 6 * 0.5 / 3, 1e-15);
}

TEST(B, Bilinear) {
  const auto s = build_space(uniform_square_mesh(4), 2);
  const CoefficientField a1 = [](const EvalPoint& p) {
    Mat2 m;
    m << 1 + p.x.x() * p.x.x(), p.x.y(), p.x.y(), 2.0;
    return m;
  };
  const CoefficientField a2 = [](const EvalPoint& p) {
    Mat2 m;
    m << std::exp(p.x.x()), 0.3, 0.3, std::cos(p.x.y());
    return m;
  };
  const double c1 = 0.7, c2 = -1.9;
  const CoefficientField mix = [&](const EvalPoint& p) -> Mat2 { return c1 * a1(p) + c2 * a2(p); };
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Eigen::MatrixXd lhs = dense(assemble_B(*s, mix, a, b));
      const Eigen::MatrixXd rhs = c1 * dense(assemble_B(*s, a1, a, b)) + c2 * dense(assemble_B(*s, a2, a, b));
      EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  const auto blocks = assemble_B_blocks(*s, mix);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      EXPECT_LE((dense(blocks[hessian_block(a, b)]) - dense(assemble_B(*s, mix, a, b)))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-15);
    }
  }
}

TEST(B, BadIndex) {
  const auto s = build_space(uniform_square_mesh(2), 1);
  const auto id = constant_coefficient(Mat2::Identity());
  EXPECT_THROW(assemble_B(*s, id, 2, 0), std::out_of_range);
  EXPECT_THROW(assemble_B(*s, id, 0, -1), std::out_of_range);
  EXPECT_THROW(assemble_C(*s, 0, 2), std::out_of_range);
}

class ColumnSums : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(ColumnSums, MatchBoundaryFlux) {
  const auto s = build_space(uniform_square_mesh(std::get<0>(GetParam())), std::get<1>(GetParam()));
  const int ni = s->num_interior();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const HessianOperator c = assemble_C(*s, a, b);
      ASSERT_EQ(c.interior.rows(), s->num_dofs());
      ASSERT_EQ(c.interior.cols(), ni);
      ASSERT_EQ(c.boundary.cols(), s->num_boundary());
      const Eigen::RowVectorXd sums_i = dense(c.interior).colwise().sum();
      const Eigen::RowVectorXd sums_b = dense(c.boundary).colwise().sum();
      for (int j = 0; j < s->num_dofs(); ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(s->num_dofs());
        e[j] = 1.0;
        const double sum = j < ni ? sums_i[j] : sums_b[j - ni];
        EXPECT_NEAR(sum, testing::boundary_flux(*s, e, a, b), 1e-10) << a << b << " dof " << j;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Meshes, ColumnSums,
                         ::testing::Values(std::make_tuple(2, 1), std::make_tuple(5, 1),
                                           std::make_tuple(2, 2), std::make_tuple(4, 2)));

TEST(C, InteriorColumnsHaveNoFluxAwayFromBoundary) {
  // a P1 basis function two layers inside the square has no boundary trace
  const auto s = build_space(uniform_square_mesh(6), 1);
  const HessianOperator c = assemble_C(*s, 0, 0);
  const Eigen::MatrixXd ci = dense(c.interior);
  for (int j = 0; j < s->num_interior(); ++j) {
    const Point& x = s->dof_coords()[j];
    if (x.cwiseAbs().maxCoeff() < 0.5) EXPECT_NEAR(ci.col(j).sum(), 0.0, 1e-13);
  }
}

TEST(C, LinearFunctionHasZeroHessian) {
  for (int p : {1, 2}) {
    const auto s = build_space(uniform_square_mesh(4), p);
    const Eigen::VectorXd v = interpolate(*s, [](const Point& x) { return 3 * x.x() - 2 * x.y() + 1; });
    const Eigen::VectorXd vi = v.head(s->num_interior()), vb = v.tail(s->num_boundary());
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const HessianOperator c = assemble_C(*s, a, b);
        const Eigen::VectorXd r = c.interior * vi + c.boundary * vb;
        EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-13);
      }
    }
  }
}

TEST(Load, Examples) {
  const auto s = build_space(uniform_square_mesh(2), 1);
  EXPECT_EQ(assemble_load(*s, [](const Point&) { return 0.0; }), Eigen::VectorXd::Zero(1));
  const Eigen::VectorXd one = assemble_load(*s, [](const Point&) { return 1.0; });
  ASSERT_EQ(one.size(), 1);
  EXPECT_NEAR(one[0], 1.0, 1e-15);
}

TEST(Load, OddUnderPointReflection) {
  for (int p : {1, 2}) {
    const auto s = build_space(uniform_square_mesh(5), p);
    const Eigen::VectorXd f = assemble_load(*s, [](const Point& x) { return x.x(); });
    const auto r = point_reflection(*s);
    for (int i = 0; i < s->num_interior(); ++i) {
      ASSERT_LT(r[i], s->num_interior());
      EXPECT_NEAR(f[i], -f[r[i]], 1e-15);
    }
  }
}

TEST(BoundaryValues, Nodal) {
  const auto s = build_space(uniform_square_mesh(3), 2);
  const Eigen::VectorXd g = boundary_values(*s, [](const Point& x) { return x.x() + 10 * x.y(); });
  ASSERT_EQ(g.size(), s->num_boundary());
  for (int k = 0; k < s->num_boundary(); ++k) {
    const Point& x = s->dof_coords()[s->num_interior() + k];
    EXPECT_EQ(g[k], x.x() + 10 * x.y());
  }
}

TEST(Stiffness, IdentityIsLaplacian) {
  const auto s = build_space(uniform_square_mesh(2), 1);
  const Eigen::MatrixXd k = dense(assemble_stiffness(*s, constant_coefficient(Mat2::Identity())));
  ASSERT_EQ(k.rows(), 1);
  EXPECT_NEAR(k(0, 0), 4.0, 1e-14);  // five-point stencil centre
}

TEST(System, DeterministicAndShaped) {
  const auto s = build_space(uniform_square_mesh(4), 2);
  const CoefficientField a = [](const EvalPoint& p) {
    Mat2 m;
    m << 2 + std::sin(p.x.x()), 0.1, 0.1, 1.5;
    return m;
  };
  const ScalarField f = [](const Point& x) { return std::cos(x.x() * x.y()); };
  const ScalarField g = [](const Point& x) { return x.x(); };
  const NvSystem one = assemble_system(s, a, f, g);
  const NvSystem two = assemble_system(s, a, f, g);
  auto same = [](const SparseMatrix& x, const SparseMatrix& y) {
    return dense(x).cwiseEqual(dense(y)).all();
  };
  EXPECT_TRUE(same(one.mass, two.mass));
  for (int k = 0; k < kHessianBlocks; ++k) {
    EXPECT_TRUE(same(one.B[k], two.B[k]));
    EXPECT_TRUE(same(one.C[k], two.C[k]));
    EXPECT_TRUE(same(one.Cb[k], two.Cb[k]));
    EXPECT_EQ(one.B[k].rows(), s->num_interior());
    EXPECT_EQ(one.C[k].cols(), s->num_interior());
    EXPECT_EQ(one.Cb[k].cols(), s->num_boundary());
  }
  EXPECT_EQ(one.load, two.load);
  EXPECT_EQ(one.boundary, two.boundary);

  const NvSystem zero_g = assemble_system(s, a, f, {});
  EXPECT_EQ(zero_g.boundary, Eigen::VectorXd::Zero(s->num_boundary()));
}

TEST(System, UpdateCoefficientMatchesFreshAssembly) {
  const auto s = build_space(uniform_square_mesh(3), 1);
  const ScalarField f = [](const Point&) { return 1.0; };
  const CoefficientField a = [](const EvalPoint& p) {
    Mat2 m;
    m << 1 + p.x.squaredNorm(), 0.2, 0.2, 1.0;
    return m;
  };
  NvSystem sys = assemble_system(s, constant_coefficient(Mat2::Identity()), f, {});
  update_coefficient(sys, a);
  const NvSystem fresh = assemble_system(s, a, f, {});
  for (int k = 0; k < kHessianBlocks; ++k) {
    EXPECT_LE((dense(sys.B[k]) - dense(fresh.B[k])).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_LE((dense(sys.stiffness) - dense(fresh.stiffness)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Coordinate, Format) {
  SparseMatrix m(2, 3);
  m.insert(0, 2) = 1.5;
  m.insert(1, 0) = -2.0;
  m.makeCompressed();
  std::ostringstream out;
  write_coordinate(out, m);
  std::istringstream in(out.str());
  int r = 0, c = 0;
  double v = 0;
  ASSERT_TRUE(in >> r >> c >> v);
  EXPECT_EQ(r, 0);
  EXPECT_EQ(c, 2);
  EXPECT_EQ(v, 1.5);
  ASSERT_TRUE(in >> r >> c >> v);
  EXPECT_EQ(r, 1);
  EXPECT_EQ(c, 0);
  EXPECT_EQ(v, -2.0);
}

}  // namespace
}  // namespace nvfem
