#include "grassmpc/condensed.hpp"

#include "grassmpc/errors.hpp"

#include <string>

namespace grassmpc {

CondensedProblem condense(const MpcSetup& setup) {
  const int n = setup.n(), m = setup.m(), N = setup.N;
  const Prediction p = prediction_matrices(setup);
  Matrix Qbar = Matrix::Zero(n * (N + 1), n * (N + 1));
  for (int k = 0; k < N; ++k) Qbar.block(k * n, k * n, n, n) = setup.sys.Q;
  Qbar.block(N * n, N * n, n, n) = setup.term.Pf;
  Matrix Rbar = Matrix::Zero(m * N, m * N);
  for (int k = 0; k < N; ++k) Rbar.block(k * m, k * m, m, m) = setup.sys.R;

  CondensedProblem cp{setup, Matrix(), Matrix(), Matrix(), admissible_set(setup)};
  cp.H = p.Su.transpose() * Qbar * p.Su + p.Kz.transpose() * Rbar * p.Kz;
  cp.H = (0.5 * (cp.H + cp.H.transpose())).eval();
  cp.F = p.Sx.transpose() * Qbar * p.Su + p.Kx.transpose() * Rbar * p.Kz;
  cp.C = p.Sx.transpose() * Qbar * p.Sx + p.Kx.transpose() * Rbar * p.Kx;
  cp.C = (0.5 * (cp.C + cp.C.transpose())).eval();
  if (!is_positive_definite(cp.H, 0.0))
    throw InvalidArgument("condensed Hessian is not positive definite");
  return cp;
}

double CondensedProblem::cost(const Vector& x, const Vector& z) const {
  require_dims(x.size() == n() && z.size() == d(), "cost evaluation dimensions");
  return z.dot(H * z) + 2.0 * x.dot(F * z) + x.dot(C * x);
}

QuadraticProgram CondensedProblem::qp(const Vector& x) const {
  require_dims(x.size() == n(), "state has wrong dimension");
  return {2.0 * H, 2.0 * F.transpose() * x, admissible.Gz, admissible.g0 + admissible.Ex * x};
}

FullSolution solve_full(const CondensedProblem& cp, const Vector& x,
                        const std::optional<Vector>& warm) {
  const SolveResult res = solve_qp(cp.qp(x), warm);
  if (res.status == SolveStatus::Infeasible)
    throw InfeasibleProblem("state is outside the feasible set");
  if (!res.optimal())
    throw NonConvergence(std::string("full-order QP ended with status ") + to_string(res.status));
  return {res.z, cp.cost(x, res.z)};
}

}  // namespace grassmpc
