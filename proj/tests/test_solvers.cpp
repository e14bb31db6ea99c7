#include "grassmpc/solvers.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace grassmpc;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix M(v.size(), 1);
  int i = 0;
  for (double x : v) M(i++, 0) = x;
  return M;
}

}  // namespace

TEST(SolveLp, IntervalLowerBound) {
  // minimize z over 2 <= z <= 4
  SolveResult res = solve_lp(Vector::Ones(1), col({1, -1}), Vector{{4.0, -2.0}});
  ASSERT_TRUE(res.optimal());
  EXPECT_NEAR(res.z(0), 2.0, 1e-12);
  EXPECT_NEAR(res.value, 2.0, 1e-12);
  EXPECT_LE(res.kkt_residual, 1e-8);
}

TEST(SolveLp, InfeasibleReturnsFarkasCertificate) {
  // z <= 1 and z >= 3
  Matrix G = col({1, -1});
  Vector g{{1.0, -3.0}};
  SolveResult res = solve_lp(Vector::Ones(1), G, g);
  ASSERT_EQ(res.status, SolveStatus::Infeasible);
  EXPECT_TRUE(verify_farkas(G, g, res.certificate));
}

TEST(SolveLp, ZeroRowViolation) {
  Matrix G = Matrix::Zero(1, 2);
  Vector g{{-1.0}};
  SolveResult res = solve_lp(Vector::Ones(2), G, g);
  ASSERT_EQ(res.status, SolveStatus::Infeasible);
  EXPECT_TRUE(verify_farkas(G, g, res.certificate));
}

TEST(SolveLp, UnboundedReportsRay) {
  // minimize -z over z >= 0
  Matrix G = col({-1});
  SolveResult res = solve_lp(-Vector::Ones(1), G, Vector::Zero(1));
  ASSERT_EQ(res.status, SolveStatus::Unbounded);
  EXPECT_LT(res.certificate(0) * -1.0, 0.0);
  EXPECT_LE((G * res.certificate).maxCoeff(), 1e-12);
}

TEST(SolveLp, RandomMatchesVertexEnumeration) {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Matrix G = oracle::random_matrix(5, 3, rng);
    Vector z0 = oracle::random_vector(3, rng);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    Vector g = G * z0;
    for (int i = 0; i < 5; ++i) g(i) += u(rng);
    // dual-feasible cost keeps the LP bounded
    Vector y(5);
    for (int i = 0; i < 5; ++i) y(i) = u(rng);
    Vector c = -G.transpose() * y;
    SolveResult res = solve_lp(c, G, g);
    auto ref = oracle::lp_by_vertex_enumeration(c, G, g);
    ASSERT_TRUE(ref.has_value());
    ASSERT_TRUE(res.optimal()) << to_string(res.status);
    EXPECT_NEAR(res.value, *ref, 1e-7 * (1 + std::abs(*ref)));
    EXPECT_LE((G * res.z - g).maxCoeff(), 1e-9);
    ++compared;
  }
  EXPECT_EQ(compared, 300);
}

TEST(SolveLp, RandomInfeasibleCertificatesVerify) {
  std::mt19937_64 rng(11);
  int infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Matrix G = oracle::random_matrix(6, 2, rng);
    Vector g = oracle::random_vector(6, rng) - Vector::Constant(6, 0.8);
    SolveResult res = solve_lp(oracle::random_vector(2, rng), G, g);
    if (res.status == SolveStatus::Infeasible) {
      ++infeasible;
      EXPECT_TRUE(verify_farkas(G, g, res.certificate));
    } else if (res.optimal()) {
      EXPECT_LE((G * res.z - g).maxCoeff(), 1e-9);
    }
  }
  EXPECT_GT(infeasible, 10);
}

TEST(SolveQp, ProjectionOntoBox) {
  // H = 2I, f = 0, 1 <= z1 <= 2
  QuadraticProgram qp{2.0 * Matrix::Identity(3, 3), Vector::Zero(3), Matrix::Zero(2, 3),
                      Vector{{2.0, -1.0}}};
  qp.G(0, 0) = 1.0;
  qp.G(1, 0) = -1.0;
  SolveResult res = solve_qp(qp);
  ASSERT_TRUE(res.optimal());
  EXPECT_NEAR((res.z - Vector{{1.0, 0.0, 0.0}}).norm(), 0.0, 1e-12);
  EXPECT_NEAR(res.value, 1.0, 1e-12);
}

TEST(SolveQp, UnconstrainedNewtonStep) {
  std::mt19937_64 rng(3);
  Matrix M = oracle::random_matrix(4, 4, rng);
  Matrix H = M * M.transpose() + Matrix::Identity(4, 4);
  Vector f = oracle::random_vector(4, rng);
  QuadraticProgram qp{H, f, Matrix(0, 4), Vector(0)};
  SolveResult res = solve_qp(qp);
  ASSERT_TRUE(res.optimal());
  EXPECT_LE((res.z + H.ldlt().solve(f)).norm(), 1e-10);
}

TEST(SolveQp, RandomMatchesEnumerationOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> nd(1, 10), qd(0, 6);
    const int n = nd(rng), q = qd(rng);
    Matrix M = oracle::random_matrix(n, n, rng);
    Matrix H = M * M.transpose() + 0.1 * Matrix::Identity(n, n);
    Vector f = oracle::random_vector(n, rng, 3.0);
    Matrix G = oracle::random_matrix(q, n, rng);
    Vector g = G * oracle::random_vector(n, rng) + Vector::Ones(q);
    QuadraticProgram qp{H, f, G, g};
    SolveResult res = solve_qp(qp);
    ASSERT_TRUE(res.optimal());
    auto ref = oracle::qp_by_active_set_enumeration(H, f, G, g);
    ASSERT_TRUE(ref.has_value());
    EXPECT_NEAR(res.value, *ref, 1e-7);
    EXPECT_LE(res.kkt_residual, 1e-8);
  }
}

TEST(SolveQp, WarmStartDoesNotChangeValue) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 6, q = 12;
    Matrix M = oracle::random_matrix(n, n, rng);
    QuadraticProgram qp{M * M.transpose() + 0.01 * Matrix::Identity(n, n),
                        oracle::random_vector(n, rng, 5.0), oracle::random_matrix(q, n, rng),
                        Vector::Ones(q)};
    SolveResult cold = solve_qp(qp);
    ASSERT_TRUE(cold.optimal());
    SolveResult warm = solve_qp(qp, cold.z);
    ASSERT_TRUE(warm.optimal());
    EXPECT_NEAR(warm.value, cold.value, 1e-9);
    EXPECT_LE(warm.iterations, cold.iterations);
    SolveResult other = solve_qp(qp, Vector(Vector::Zero(n)));
    EXPECT_NEAR(other.value, cold.value, 1e-9);
  }
}

TEST(SolveQp, SingularHessianValueAndMinimumNorm) {
  // f(z) = (z1 + z2 - 2)^2 over the box [-5, 5]^2; optimal set is a segment.
  Matrix a(1, 2);
  a << 1, 1;
  QuadraticProgram qp{2.0 * a.transpose() * a, -4.0 * a.transpose(), Matrix(4, 2), Vector(4)};
  qp.G << 1, 0, -1, 0, 0, 1, 0, -1;
  qp.g.setConstant(5.0);
  SolveResult res = solve_qp(qp);
  ASSERT_TRUE(res.optimal());
  EXPECT_NEAR(res.value, -4.0, 1e-9);
  EXPECT_NEAR(res.z(0), 1.0, 1e-6);
  EXPECT_NEAR(res.z(1), 1.0, 1e-6);
  EXPECT_LE(res.kkt_residual, 1e-8);
}

TEST(SolveQp, SingularHessianWithRayDirections) {
  // Objective independent of z2; feasible set bounded.
  QuadraticProgram qp{Matrix::Zero(2, 2), Vector::Zero(2), Matrix(4, 2), Vector(4)};
  qp.H(0, 0) = 2.0;
  qp.f << -2.0, 1.0;
  qp.G << 1, 0, -1, 0, 0, 1, 0, -1;
  qp.g << 3, 3, 1, 2;
  SolveResult res = solve_qp(qp);
  ASSERT_TRUE(res.optimal());
  EXPECT_NEAR(res.z(0), 1.0, 1e-9);
  EXPECT_NEAR(res.z(1), -2.0, 1e-9);
  EXPECT_NEAR(res.value, -1.0 - 2.0, 1e-9);
}

TEST(SolveQp, InfeasibleCertificate) {
  QuadraticProgram qp{Matrix::Identity(2, 2), Vector::Zero(2), Matrix(2, 2), Vector(2)};
  qp.G << 1, 1, -1, -1;
  qp.g << -1, -1;
  SolveResult res = solve_qp(qp);
  ASSERT_EQ(res.status, SolveStatus::Infeasible);
  EXPECT_TRUE(verify_farkas(qp.G, qp.g, res.certificate));
}

TEST(SolveQp, DimensionMismatchThrows) {
  QuadraticProgram qp{Matrix::Identity(2, 2), Vector::Zero(3), Matrix(0, 3), Vector(0)};
  EXPECT_THROW(solve_qp(qp), DimensionMismatch);
}
