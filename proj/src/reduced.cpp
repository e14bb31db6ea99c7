#include "grassmpc/reduced.hpp"

#include "grassmpc/errors.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

namespace grassmpc {

void validate_pair(const SubspacePair& pair, int d, int n) {
  require_dims(pair.U.rows() == d, "basis must have d rows");
  require_dims(pair.r() >= 1 && pair.r() <= d, "subspace dimension must lie in [1, d]");
  require_dims(pair.Gamma.rows() == d && pair.Gamma.cols() == n, "offset gain must be d x n");
  require_dims(pair.xi.size() == d, "offset vector must have length d");
  const Matrix defect = pair.U.transpose() * pair.U - Matrix::Identity(pair.r(), pair.r());
  if (defect.norm() > 1e-10) throw InvalidArgument("basis columns are not orthonormal");
}

ExtendedState make_extended_state(const AdmissibleSetRep& rep, const Matrix& initial_vertices,
                                  Vector x, Vector ztilde, double tol) {
  require_dims(x.size() == rep.state_dim() && ztilde.size() == rep.dim(),
               "extended state dimensions");
  if (rep.contains(x, ztilde, tol)) return {std::move(x), std::move(ztilde)};
  if (ztilde.isZero(0.0) && in_convex_hull(initial_vertices, x, tol))
    return {std::move(x), std::move(ztilde)};
  throw PreconditionViolated("extended state is neither initial nor running");
}

ReducedSolution solve_reduced(const CondensedProblem& cp, const SubspacePair& pair,
                              const Vector& x, const Vector& ztilde) {
  const int d = cp.d();
  validate_pair(pair, d, cp.n());
  require_dims(x.size() == cp.n() && ztilde.size() == d, "reduced problem dimensions");
  const int r = pair.r();
  if (x.isZero(0.0) && ztilde.isZero(0.0))
    return {Vector::Zero(r), 0.0, Vector::Zero(d), 0.0};

  Matrix M(d, r + 1);
  M.leftCols(r) = pair.U;
  M.col(r) = pair.offset(x) - ztilde;
  const AdmissibleSetRep& rep = cp.admissible;
  QuadraticProgram qp;
  qp.H = 2.0 * M.transpose() * cp.H * M;
  qp.H = (0.5 * (qp.H + qp.H.transpose())).eval();
  qp.f = 2.0 * M.transpose() * (cp.H * ztilde + cp.F.transpose() * x);
  qp.G = rep.Gz * M;
  qp.g = rep.g0 + rep.Ex * x - rep.Gz * ztilde;

  const SolveResult res = solve_qp(qp, Vector(Vector::Zero(r + 1)));
  if (res.status == SolveStatus::Infeasible)
    throw InfeasibleProblem("reduced problem infeasible: the pair is not initially admissible here");
  if (!res.optimal())
    throw NonConvergence(std::string("reduced QP ended with status ") + to_string(res.status));
  ReducedSolution sol;
  sol.alpha = res.z.head(r);
  sol.tau = res.z(r);
  sol.z = M * res.z + ztilde;
  sol.value = cp.cost(x, sol.z);
  return sol;
}

Vector admissible_shift(const CondensedProblem& cp, const Vector& x, const Vector& z, double tol) {
  const MpcSetup& setup = cp.setup;
  const AdmissibleSetRep& rep = cp.admissible;
  if (!rep.contains(x, z, tol)) throw PreconditionViolated("input sequence is not admissible");
  const Trajectory tr = rollout(setup.sys, setup.K, x, z);
  const Vector next = tr.states.col(1);
  const int m = setup.m(), N = setup.N;
  Vector shifted = Vector::Zero(z.size());
  if (next.isZero(0.0)) return shifted;
  shifted.head((N - 1) * m) = z.tail((N - 1) * m);
  const Vector xN = tr.states.col(N);
  shifted.tail(m) = setup.term.Kf * xN - setup.K * xN;
  if (!rep.contains(next, shifted, tol))
    throw PreconditionViolated("shifted sequence is not admissible; terminal ingredients are inconsistent");
  return shifted;
}

namespace {

void finalize_lyapunov(ClosedLoopTrace& trace, double tol) {
  const auto& s = trace.steps;
  trace.lyapunov_violations = 0;
  trace.worst_lyapunov_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < s.size(); ++t) {
    const double next = (t + 1 < s.size()) ? s[t + 1].value : trace.final_value;
    const double excess = (next - s[t].value + s[t].stage_cost) / (1.0 + s[t].value);
    trace.worst_lyapunov_excess = std::max(trace.worst_lyapunov_excess, excess);
    if (excess > tol) ++trace.lyapunov_violations;
  }
  if (s.empty()) trace.worst_lyapunov_excess = 0.0;
}

void check_inside_state_set(const MpcSetup& setup, const Vector& x) {
  if (!setup.X.contains(x, 1e-8)) throw DivergenceDetected("closed-loop state left the state set");
}

}  // namespace

ClosedLoopTrace run_closed_loop(const CondensedProblem& cp, const SubspacePair& pair,
                                const Vector& x_start, const ClosedLoopOptions& opts) {
  const MpcSetup& setup = cp.setup;
  const int d = cp.d();
  validate_pair(pair, d, cp.n());
  ClosedLoopTrace trace;
  Vector x = x_start;
  Vector guess = Vector::Zero(d);
  bool switched = false;
  for (int t = 0; t < opts.max_steps; ++t) {
    check_inside_state_set(setup, x);
    ClosedLoopStep step;
    step.t = t;
    step.x = x;
    step.ztilde = guess;
    if (t > 0) {
      step.guess_admissible = cp.admissible.contains(x, guess, opts.admissibility_tol);
      if (!step.guess_admissible) ++trace.feasibility_violations;
    }
    switched = switched || (opts.terminal_switch && setup.term.Xf.contains(x, 0.0));
    Vector next;
    if (switched) {
      step.u = setup.term.Kf * x;
      step.value = terminal_cost(setup.term, x);
      next = setup.sys.A * x + setup.sys.B * step.u;
    } else {
      const ReducedSolution sol = solve_reduced(cp, pair, x, guess);
      const Trajectory tr = rollout(setup.sys, setup.K, x, sol.z);
      step.u = tr.controls.col(0);
      step.value = sol.value;
      next = tr.states.col(1);
      guess = admissible_shift(cp, x, sol.z, opts.admissibility_tol);
    }
    step.stage_cost = stage_cost(setup.sys, x, step.u);
    trace.steps.push_back(std::move(step));
    x = next;
    if (x.norm() <= opts.convergence_eps) {
      trace.converged = true;
      break;
    }
  }
  trace.final_state = x;
  trace.final_guess = guess;
  if (switched) {
    trace.final_value = terminal_cost(setup.term, x);
  } else {
    check_inside_state_set(setup, x);
    if (!cp.admissible.contains(x, guess, opts.admissibility_tol)) ++trace.feasibility_violations;
    trace.final_value = solve_reduced(cp, pair, x, guess).value;
  }
  finalize_lyapunov(trace, opts.lyapunov_tol);
  return trace;
}

ClosedLoopTrace run_full_closed_loop(const CondensedProblem& cp, const Vector& x_start,
                                     const ClosedLoopOptions& opts) {
  const MpcSetup& setup = cp.setup;
  ClosedLoopTrace trace;
  Vector x = x_start;
  std::optional<Vector> warm;
  for (int t = 0; t < opts.max_steps; ++t) {
    check_inside_state_set(setup, x);
    const FullSolution sol = solve_full(cp, x, warm);
    const Trajectory tr = rollout(setup.sys, setup.K, x, sol.z);
    ClosedLoopStep step;
    step.t = t;
    step.x = x;
    step.ztilde = sol.z;
    step.u = tr.controls.col(0);
    step.value = sol.value;
    step.stage_cost = stage_cost(setup.sys, x, step.u);
    trace.steps.push_back(std::move(step));
    warm = admissible_shift(cp, x, sol.z, opts.admissibility_tol);
    x = tr.states.col(1);
    if (x.norm() <= opts.convergence_eps) {
      trace.converged = true;
      break;
    }
  }
  trace.final_state = x;
  trace.final_guess = warm.value_or(Vector::Zero(cp.d()));
  check_inside_state_set(setup, x);
  trace.final_value = solve_full(cp, x, warm).value;
  finalize_lyapunov(trace, opts.lyapunov_tol);
  return trace;
}

ClosedLoopCost closed_loop_cost(const ClosedLoopTrace& trace, const TerminalIngredients& term) {
  if (!trace.converged) throw NotConverged("closed loop did not reach the convergence threshold");
  ClosedLoopCost out;
  for (const auto& step : trace.steps) out.cost += step.stage_cost;
  out.remainder = terminal_cost(term, trace.final_state);
  return out;
}

void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace) {
  if (trace.steps.empty()) {
    out << "t,stage_cost,value\n";
    return;
  }
  const auto n = trace.steps.front().x.size();
  const auto m = trace.steps.front().u.size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << ",stage_cost,value\n";
  out.precision(17);
  for (const auto& s : trace.steps) {
    out << s.t;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << s.x(i);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << s.u(i);
    out << ',' << s.stage_cost << ',' << s.value << '\n';
  }
}

}  // namespace grassmpc
