#include "grassmpc/errors.hpp"
#include "grassmpc/reduced.hpp"

#include "oracles.hpp"
#include "pendulum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace grassmpc;

namespace {

const CondensedProblem& pendulum_problem() {
  static const CondensedProblem cp = condense(bench::pendulum_setup(13));
  return cp;
}

SubspacePair full_pair(int d, int n) {
  return {Matrix::Identity(d, d), Matrix::Zero(d, n), Vector::Zero(d)};
}

// One-dimensional basis through the full-order optimizer at x.
SubspacePair aligned_pair(const CondensedProblem& cp, const Vector& x) {
  const Vector z = solve_full(cp, x).z;
  return {z.normalized(), Matrix::Zero(cp.d(), cp.n()), Vector::Zero(cp.d())};
}

}  // namespace

TEST(SubspacePair, RejectsNonOrthonormalBasis) {
  SubspacePair p = full_pair(4, 2);
  p.U(0, 0) = 1.0 + 1e-6;
  EXPECT_THROW(validate_pair(p, 4, 2), InvalidArgument);
  EXPECT_THROW(validate_pair(full_pair(3, 2), 4, 2), DimensionMismatch);
}

TEST(SolveReduced, OriginReturnsExactZeros) {
  const auto& cp = pendulum_problem();
  const auto sol = solve_reduced(cp, aligned_pair(cp, Vector{{0.3, 0.1}}), Vector::Zero(2),
                                 Vector::Zero(cp.d()));
  EXPECT_EQ(sol.value, 0.0);
  EXPECT_TRUE(sol.z.isZero(0.0));
  EXPECT_EQ(sol.tau, 0.0);
}

TEST(SolveReduced, FullDimensionalBasisRecoversFullValue) {
  const auto& cp = pendulum_problem();
  for (const Vector& x : {Vector{{0.5, -0.2}}, Vector{{-0.2, 0.3}}, Vector{{0.1, 0.05}}}) {
    const auto full = solve_full(cp, x);
    const auto red = solve_reduced(cp, full_pair(cp.d(), 2), x, Vector::Zero(cp.d()));
    EXPECT_NEAR(red.value, full.value, 1e-8 * std::max(1.0, full.value));
  }
}

TEST(SolveReduced, NeverWorseThanGuess) {
  const auto& cp = pendulum_problem();
  std::mt19937_64 rng(5);
  const Vector x{{0.4, 0.0}};
  const auto qp = cp.qp(x);
  const SubspacePair pair{oracle::random_matrix(cp.d(), 2, rng).householderQr().householderQ() *
                              Matrix::Identity(cp.d(), 2),
                          Matrix::Zero(cp.d(), 2), Vector::Zero(cp.d())};
  for (int k = 0; k < 10; ++k) {
    const auto guess = solve_lp(oracle::random_vector(cp.d(), rng), qp.G, qp.g);
    ASSERT_TRUE(guess.optimal());
    const auto red = solve_reduced(cp, pair, x, guess.z);
    EXPECT_LE(red.value, cp.cost(x, guess.z) + 1e-9);
    EXPECT_TRUE(cp.admissible.contains(x, red.z, 1e-8));
  }
}

TEST(SolveReduced, InvariantUnderBasisRotation) {
  const auto& cp = pendulum_problem();
  std::mt19937_64 rng(9);
  const Matrix U = qr_orthonormalize(oracle::random_matrix(cp.d(), 3, rng));
  const Matrix Gamma = 0.1 * oracle::random_matrix(cp.d(), 2, rng);
  const Vector xi = Vector::Zero(cp.d());
  const Matrix Q = random_orthogonal(3, rng);
  const Vector x{{0.3, -0.1}};
  const Vector guess = solve_full(cp, Vector{{0.35, -0.1}}).z;
  const Vector zt = cp.admissible.contains(x, guess, 1e-9) ? guess : Vector(solve_full(cp, x).z);
  const auto a = solve_reduced(cp, {U, Gamma, xi}, x, zt);
  const auto b = solve_reduced(cp, {U * Q, Gamma, xi}, x, zt);
  EXPECT_NEAR(a.value, b.value, 1e-8 * std::max(1.0, a.value));
}

TEST(SolveReduced, NotInitiallyAdmissibleThrows) {
  const auto& cp = pendulum_problem();
  // Zero offset and a basis that cannot brake the pendulum.
  Matrix U = Matrix::Zero(cp.d(), 1);
  U(cp.d() - 1, 0) = 1.0;
  EXPECT_THROW(solve_reduced(cp, {U, Matrix::Zero(cp.d(), 2), Vector::Zero(cp.d())},
                             Vector{{0.9, 0.3}}, Vector::Zero(cp.d())),
               InfeasibleProblem);
}

TEST(AdmissibleShift, StaysAdmissible) {
  const auto& cp = pendulum_problem();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector x{{-0.6, 0.2}};
  const auto qp = cp.qp(x);
  const Vector zopt = solve_full(cp, x).z;
  for (int k = 0; k < 20; ++k) {
    const auto vertex = solve_lp(oracle::random_vector(cp.d(), rng), qp.G, qp.g);
    const double l = unif(rng);
    const Vector z = (1 - l) * zopt + l * vertex.z;
    const Vector s = admissible_shift(cp, x, z);
    const Trajectory tr = rollout(cp.setup.sys, cp.setup.K, x, z);
    EXPECT_TRUE(cp.admissible.contains(tr.states.col(1), s, 1e-9));
    EXPECT_EQ(s.head(cp.d() - 1), z.tail(cp.d() - 1));
  }
}

TEST(AdmissibleShift, LqrTailIsZeroCorrection) {
  // With K = Kf the appended element vanishes.
  const auto& cp = pendulum_problem();
  const Vector x{{0.2, 0.1}};
  const Vector z = solve_full(cp, x).z;
  EXPECT_EQ(admissible_shift(cp, x, z)(cp.d() - 1), 0.0);
}

TEST(AdmissibleShift, ZeroAtOrigin) {
  const auto& cp = pendulum_problem();
  EXPECT_TRUE(admissible_shift(cp, Vector::Zero(2), Vector::Zero(cp.d())).isZero(0.0));
}

TEST(AdmissibleShift, RejectsInadmissibleSequence) {
  const auto& cp = pendulum_problem();
  EXPECT_THROW(admissible_shift(cp, Vector::Zero(2), Vector::Constant(cp.d(), 5.0)),
               PreconditionViolated);
}

TEST(ExtendedState, InitialAndRunningModes) {
  const auto& cp = pendulum_problem();
  Matrix V(2, 4);
  V << -0.5, 0.5, 0.5, -0.5, -0.1, -0.1, 0.1, 0.1;
  EXPECT_NO_THROW(make_extended_state(cp.admissible, V, Vector{{0.4, 0.0}}, Vector::Zero(cp.d())));
  const Vector x{{0.8, -0.2}};
  EXPECT_NO_THROW(make_extended_state(cp.admissible, V, x, solve_full(cp, x).z));
  EXPECT_THROW(make_extended_state(cp.admissible, V, x, Vector::Constant(cp.d(), 1.0)),
               PreconditionViolated);
}

TEST(ClosedLoop, FullBasisMatchesStandardMpc) {
  const auto& cp = pendulum_problem();
  const Vector xs{{0.7, -0.2}};
  const auto red = run_closed_loop(cp, full_pair(cp.d(), 2), xs);
  const auto full = run_full_closed_loop(cp, xs);
  ASSERT_TRUE(red.converged);
  ASSERT_TRUE(full.converged);
  const double a = closed_loop_cost(red, cp.setup.term).cost;
  const double b = closed_loop_cost(full, cp.setup.term).cost;
  EXPECT_NEAR(a, b, 1e-6 * b);
}

TEST(ClosedLoop, OneDimensionalBasisIsRecursivelyFeasibleAndDecreasing) {
  const auto& cp = pendulum_problem();
  for (const Vector& xs : {Vector{{0.8, -0.3}}, Vector{{-0.5, 0.3}}, Vector{{0.3, 0.2}}}) {
    const auto trace = run_closed_loop(cp, aligned_pair(cp, xs), xs);
    ASSERT_TRUE(trace.converged);
    EXPECT_EQ(trace.feasibility_violations, 0);
    EXPECT_EQ(trace.lyapunov_violations, 0);
    for (std::size_t t = 1; t < trace.steps.size(); ++t)
      EXPECT_TRUE(trace.steps[t].guess_admissible);
    const auto c = closed_loop_cost(trace, cp.setup.term);
    // Accumulated cost bounded by the initial value.
    EXPECT_LE(c.cost, trace.initial_value() * (1 + 1e-9));
    EXPECT_GE(trace.initial_value(), solve_full(cp, xs).value - 1e-9);
  }
}

TEST(ClosedLoop, TerminalSwitchUsesTerminalGain) {
  const auto& cp = pendulum_problem();
  ClosedLoopOptions opts;
  opts.terminal_switch = true;
  const Vector xs{{0.05, 0.02}};
  ASSERT_TRUE(cp.setup.term.Xf.contains(xs, 0.0));
  const auto trace = run_closed_loop(cp, aligned_pair(cp, Vector{{0.5, 0.0}}), xs, opts);
  ASSERT_TRUE(trace.converged);
  for (const auto& s : trace.steps)
    EXPECT_NEAR((s.u - cp.setup.term.Kf * s.x).norm(), 0.0, 1e-14);
}

TEST(ClosedLoop, StartOutsideStateSetDiverges) {
  const auto& cp = pendulum_problem();
  EXPECT_THROW(run_closed_loop(cp, full_pair(cp.d(), 2), Vector{{1.5, 0.0}}), DivergenceDetected);
}

TEST(ClosedLoop, TruncatedRunIsNotConverged) {
  const auto& cp = pendulum_problem();
  ClosedLoopOptions opts;
  opts.max_steps = 2;
  const auto trace = run_closed_loop(cp, full_pair(cp.d(), 2), Vector{{0.5, 0.0}}, opts);
  EXPECT_FALSE(trace.converged);
  EXPECT_EQ(trace.steps.size(), 2u);
  EXPECT_THROW(closed_loop_cost(trace, cp.setup.term), NotConverged);
}

TEST(ClosedLoop, TraceCsvLayout) {
  const auto& cp = pendulum_problem();
  ClosedLoopOptions opts;
  opts.max_steps = 3;
  const auto trace = run_closed_loop(cp, full_pair(cp.d(), 2), Vector{{0.5, 0.0}}, opts);
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x0,x1,u0,stage_cost,value");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
