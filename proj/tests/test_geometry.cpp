#include "grassmpc/admissible.hpp"
#include "grassmpc/errors.hpp"
#include "grassmpc/polytope.hpp"

#include "oracles.hpp"
#include "pendulum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace grassmpc;

namespace {

Polytope unit_box(int n) {
  return Polytope::box(-Vector::Ones(n), Vector::Ones(n));
}

// Coarse-to-fine grid maximization of the smallest facet distance.
Vector grid_chebyshev_2d(const Polytope& P, double lo, double hi) {
  Vector best = Vector::Zero(2);
  double best_val = -1e300;
  double step = (hi - lo) / 200.0;
  Vector center{{0.5 * (lo + hi), 0.5 * (lo + hi)}};
  double half = 0.5 * (hi - lo);
  for (int level = 0; level < 6; ++level) {
    for (double x = center(0) - half; x <= center(0) + half; x += step)
      for (double y = center(1) - half; y <= center(1) + half; y += step) {
        const Vector p{{x, y}};
        double val = 1e300;
        for (int i = 0; i < P.num_constraints(); ++i)
          val = std::min(val, (P.g()(i) - P.G().row(i).dot(p)) / P.G().row(i).norm());
        if (val > best_val) {
          best_val = val;
          best = p;
        }
      }
    center = best;
    half = 4.0 * step;
    step = half / 50.0;
  }
  return best;
}

}  // namespace

TEST(Polytope, ContainsPaperBoxes) {
  const Polytope box1 = Polytope::box(Vector{{2.0, 0.0}}, Vector{{4.0, 2.0}});
  EXPECT_TRUE(contains(box1, Vector{{3.0, 1.0}}, 1e-9));
  EXPECT_FALSE(contains(box1, Vector{{3.0, 5.0}}, 1e-9));
  EXPECT_TRUE(contains(box1, Vector{{4.0, 2.0}}, 1e-9));
  EXPECT_THROW(contains(box1, Vector::Zero(3), 1e-9), DimensionMismatch);
}

TEST(Polytope, RejectsNonFiniteData) {
  Matrix G = Matrix::Identity(1, 1);
  Vector g{{std::nan("")}};
  EXPECT_THROW(Polytope(G, g), InvalidArgument);
}

TEST(ChebyshevCenter, Boxes) {
  Center c1 = chebyshev_center(Polytope::box(Vector{{2.0, 0.0}}, Vector{{4.0, 2.0}}));
  EXPECT_LE((c1.point - Vector{{3.0, 1.0}}).norm(), 1e-9);
  EXPECT_NEAR(c1.radius, 1.0, 1e-9);
  Center c2 = chebyshev_center(Polytope::box(Vector{{2.0, 4.0}}, Vector{{4.0, 6.0}}));
  EXPECT_LE((c2.point - Vector{{3.0, 5.0}}).norm(), 1e-9);
  EXPECT_NEAR(c2.radius, 1.0, 1e-9);
}

TEST(ChebyshevCenter, SimplexMatchesGridOracle) {
  Matrix G(3, 2);
  G << -1, 0, 0, -1, 1, 1;
  const Polytope simplex(G, Vector{{0.0, 0.0, 1.0}});
  const Center c = chebyshev_center(simplex);
  const Vector grid = grid_chebyshev_2d(simplex, 0.0, 1.0);
  EXPECT_LE((c.point - grid).norm(), 1e-4);
  EXPECT_NEAR(c.radius, 1.0 / (2.0 + std::sqrt(2.0)), 1e-9);
}

TEST(ChebyshevCenter, EmptyThrows) {
  Matrix G(2, 1);
  G << 1, -1;
  EXPECT_THROW(chebyshev_center(Polytope(G, Vector{{0.0, -1.0}})), EmptyPolytope);
}

TEST(ChebyshevCenter, StrictlyInsideRandomPolytopes) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix G = oracle::random_matrix(8, 3, rng);
    const Polytope P = Polytope(G, Vector::Ones(8)).intersect(Polytope::box(-5 * Vector::Ones(3), 5 * Vector::Ones(3)));
    const Center c = chebyshev_center(P);
    ASSERT_GT(c.radius, 0.0);
    EXPECT_LT(P.max_violation(c.point), 0.0);
  }
}

TEST(AnalyticCenter, BoxCenter) {
  const Vector c = analytic_center(Polytope::box(Vector{{2.0, 0.0}}, Vector{{4.0, 2.0}}));
  EXPECT_LE((c - Vector{{3.0, 1.0}}).norm(), 1e-9);
}

TEST(Redundancy, RemovesImpliedRows) {
  Polytope P = unit_box(2).intersect(Polytope(Matrix{{1.0, 1.0}}, Vector{{5.0}}));
  const Polytope R = remove_redundant(P);
  EXPECT_EQ(R.num_constraints(), 4);
  EXPECT_TRUE(equals(P, R));
}

TEST(Containment, SubsetAndEquality) {
  const Polytope small = Polytope::box(Vector{{-0.5, -0.5}}, Vector{{0.5, 0.5}});
  EXPECT_TRUE(is_subset(small, unit_box(2)));
  EXPECT_FALSE(is_subset(unit_box(2), small));
  EXPECT_FALSE(equals(small, unit_box(2)));
}

TEST(MaxInvariantSet, ZeroDynamicsKeepsConstraintSet) {
  const Polytope Xc = unit_box(2);
  EXPECT_TRUE(equals(max_invariant_set(Matrix::Zero(2, 2), Xc), Xc));
}

TEST(MaxInvariantSet, ContractionKeepsBox) {
  const Polytope Xc = unit_box(2);
  EXPECT_TRUE(equals(max_invariant_set(0.5 * Matrix::Identity(2, 2), Xc), Xc));
}

TEST(MaxInvariantSet, PendulumLqrSetIsInvariant) {
  const LinearSystem sys = bench::pendulum_system();
  const LqrSolution lqr = dare_solve(sys);
  const Matrix Acl = sys.A + sys.B * lqr.K;
  const Polytope Xc = bench::pendulum_state_set().intersect(bench::pendulum_input_set().preimage(lqr.K));
  const Polytope omega = max_invariant_set(Acl, Xc);
  EXPECT_TRUE(is_subset(omega, Xc));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u1(-1.0, 1.0), u2(-0.35, 0.35);
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vector x{{u1(rng), u2(rng)}};
    if (!omega.contains(x, 0.0)) continue;
    ++inside;
    EXPECT_TRUE(omega.contains(Acl * x, 1e-12));
  }
  EXPECT_GT(inside, 100);
}

TEST(Terminal, PendulumIngredientsPassChecks) {
  const MpcSetup setup = bench::pendulum_setup(5);
  const TerminalCheck check = check_terminal_ingredients(setup);
  EXPECT_TRUE(check.ok());
  EXPECT_GE(check.worst_decrease_margin, -1e-12);
}

TEST(AdmissibleSet, MatchesRolloutOnRandomPairs) {
  const MpcSetup setup = bench::pendulum_setup(6);
  const AdmissibleSetRep rep = admissible_set(setup);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  int agree = 0, inside = 0;
  for (int i = 0; i < 100; ++i) {
    const Vector x{{ux(rng), 0.35 * ux(rng)}};
    const Vector z = oracle::random_vector(setup.d(), rng, 0.15);
    const bool by_rep = rep.contains(x, z, 1e-9);
    agree += by_rep == admissible_by_rollout(setup, x, z, 1e-9);
    inside += by_rep;
  }
  EXPECT_EQ(agree, 100);
  EXPECT_GT(inside, 0);
}

TEST(AdmissibleSet, OffsetsMatchRolloutStacking) {
  const MpcSetup setup = bench::pendulum_setup(4);
  const AdmissibleSetRep rep = admissible_set(setup);
  const Vector x{{0.3, -0.1}};
  const Trajectory tr = rollout(setup.sys, setup.K, x, Vector::Zero(setup.d()));
  Vector expected(rep.g0.size());
  int r = 0;
  for (int k = 0; k < setup.N; ++k) {
    expected.segment(r, setup.X.num_constraints()) = setup.X.g() - setup.X.G() * tr.states.col(k);
    r += setup.X.num_constraints();
    expected.segment(r, setup.U.num_constraints()) = setup.U.g() - setup.U.G() * tr.controls.col(k);
    r += setup.U.num_constraints();
  }
  expected.tail(setup.term.Xf.num_constraints()) =
      setup.term.Xf.g() - setup.term.Xf.G() * tr.states.col(setup.N);
  EXPECT_LE((rep.g0 + rep.Ex * x - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AdmissibleSet, OriginAndInputBound) {
  const MpcSetup setup = bench::pendulum_setup(5);
  const AdmissibleSetRep rep = admissible_set(setup);
  EXPECT_TRUE(rep.contains(Vector::Zero(2), Vector::Zero(5)));
  Vector z = Vector::Zero(5);
  z(0) = 1.5;
  EXPECT_FALSE(rep.contains(Vector::Zero(2), z));
}

TEST(AdmissibleSet, ShiftedSetIdentity) {
  const MpcSetup setup = bench::pendulum_setup(5);
  const AdmissibleSetRep rep = admissible_set(setup);
  const Vector x{{0.2, 0.05}};
  const Vector offset = Vector::LinSpaced(5, -0.1, 0.1);
  const Polytope shifted = rep.at(x).translate(offset);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Vector w = oracle::random_vector(5, rng, 0.2);
    EXPECT_EQ(shifted.contains(w, 1e-9), rep.contains(x, w + offset, 1e-9));
    EXPECT_NEAR(shifted.max_violation(w), rep.max_violation(x, w + offset), 1e-12);
  }
}

TEST(FeasibleSetInner, PendulumRayCertificates) {
  const MpcSetup setup = bench::pendulum_setup(12);
  const Matrix V = feasible_set_inner(setup, 64);
  const AdmissibleSetRep rep = admissible_set(setup);
  ASSERT_GE(V.cols(), 3);
  for (int j = 0; j < V.cols(); ++j) {
    EXPECT_TRUE(is_feasible_state(rep, V.col(j)));
    EXPECT_FALSE(is_feasible_state(rep, 1.05 * V.col(j)));
  }
  EXPECT_TRUE(is_feasible_state(rep, Vector::Zero(2)));
  for (int j = 0; j < V.cols(); ++j) EXPECT_TRUE(bench::pendulum_state_set().contains(V.col(j), 1e-9));
}

TEST(FeasibleSetInner, LooseConstraintsReachStateBounds) {
  LinearSystem sys{0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                   Matrix::Identity(2, 2)};
  const MpcSetup setup = make_lqr_setup(sys, unit_box(2), Polytope::box(-10 * Vector::Ones(2), 10 * Vector::Ones(2)), 6);
  const AdmissibleSetRep rep = admissible_set(setup);
  EXPECT_NEAR(max_feasible_radius(rep, Vector{{1.0, 0.0}}), 1.0, 1e-9);
  EXPECT_NEAR(max_feasible_radius(rep, Vector{{0.0, -1.0}}), 1.0, 1e-9);
  const Matrix V = feasible_set_inner(setup, 16);
  EXPECT_EQ(V.cols(), 4);  // the box corners
}

TEST(FeasibleSetInner, BrokenTerminalSetThrows) {
  MpcSetup setup = bench::pendulum_setup(3);
  setup.term.Xf = Polytope::box(Vector{{5.0, 5.0}}, Vector{{6.0, 6.0}});
  EXPECT_THROW(feasible_set_inner(setup, 8), OriginInfeasible);
}

TEST(Hull, PlanarHullAndMembership) {
  Matrix pts(2, 6);
  pts << 0, 1, 1, 0, 0.5, 0.5,
         0, 0, 1, 1, 0.5, 0.0;
  const Matrix V = convex_hull_2d(pts);
  EXPECT_EQ(V.cols(), 4);
  const Polytope P = hull_polytope_2d(V);
  EXPECT_TRUE(P.contains(Vector{{0.5, 0.5}}));
  EXPECT_FALSE(P.contains(Vector{{1.5, 0.5}}));
  EXPECT_TRUE(in_convex_hull(V, Vector{{0.25, 0.75}}));
  EXPECT_FALSE(in_convex_hull(V, Vector{{-0.25, 0.75}}));
}
