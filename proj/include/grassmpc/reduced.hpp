#pragma once

#include "grassmpc/condensed.hpp"

#include <iosfwd>
#include <vector>

namespace grassmpc {

/// Basis U (d x r, orthonormal columns) and affine offset sigma(x) = Gamma x + xi.
struct SubspacePair {
  Matrix U;
  Matrix Gamma;
  Vector xi;

  int d() const { return static_cast<int>(U.rows()); }
  int r() const { return static_cast<int>(U.cols()); }
  Vector offset(const Vector& x) const { return Gamma * x + xi; }
};

/// Checks dimensions against (d, n) and |U'U - I|_F <= 1e-10.
void validate_pair(const SubspacePair& pair, int d, int n);

/// Plant state and admissible guess.
struct ExtendedState {
  Vector x;
  Vector ztilde;
};

/// Accepts (x, 0) with x in conv(initial_vertices), or ztilde in U^N(x).
/// Throws PreconditionViolated otherwise.
ExtendedState make_extended_state(const AdmissibleSetRep& rep, const Matrix& initial_vertices,
                                  Vector x, Vector ztilde, double tol = 1e-8);

struct ReducedSolution {
  Vector alpha;
  double tau = 0.0;
  Vector z;
  double value = 0.0;
};

/// Reduced-order problem in (alpha, tau) over z = U alpha + tau sigma(x) +
/// (1 - tau) ztilde. Throws InfeasibleProblem when no admissible z exists,
/// which only happens with a guess of zero and a pair that is not
/// initially admissible at x.
ReducedSolution solve_reduced(const CondensedProblem& cp, const SubspacePair& pair,
                              const Vector& x, const Vector& ztilde);

/// Shifted sequence (z_1, ..., z_{N-1}, Kf x_N - K x_N), or zero when the
/// successor state is the origin. Throws PreconditionViolated if z is not
/// admissible for x or the shift leaves U^N(x+).
Vector admissible_shift(const CondensedProblem& cp, const Vector& x, const Vector& z,
                        double tol = 1e-8);

struct ClosedLoopStep {
  int t = 0;
  Vector x;
  Vector ztilde;
  Vector u;
  double stage_cost = 0.0;
  double value = 0.0;
  bool guess_admissible = true;
};

struct ClosedLoopTrace {
  std::vector<ClosedLoopStep> steps;
  Vector final_state;
  Vector final_guess;
  /// Optimal value at the final extended state.
  double final_value = 0.0;
  bool converged = false;
  int lyapunov_violations = 0;
  int feasibility_violations = 0;
  /// max over t of V(t+1) - V(t) + l(t), relative to 1 + V(t).
  double worst_lyapunov_excess = 0.0;

  double initial_value() const { return steps.empty() ? 0.0 : steps.front().value; }
};

struct ClosedLoopOptions {
  int max_steps = 400;
  double convergence_eps = 1e-6;
  /// Apply Kf x once the state is inside Xf instead of solving.
  bool terminal_switch = false;
  double admissibility_tol = 1e-8;
  double lyapunov_tol = 1e-6;
};

/// Receding-horizon loop of the reduced-order scheme starting from (x_s, 0).
/// Throws DivergenceDetected if a state leaves X.
ClosedLoopTrace run_closed_loop(const CondensedProblem& cp, const SubspacePair& pair,
                                const Vector& x_start, const ClosedLoopOptions& opts = {});

/// Standard full-order MPC loop (first move of mu_N applied).
ClosedLoopTrace run_full_closed_loop(const CondensedProblem& cp, const Vector& x_start,
                                     const ClosedLoopOptions& opts = {});

struct ClosedLoopCost {
  double cost = 0.0;
  /// V_f(x_final), an estimate of the truncated tail.
  double remainder = 0.0;
};

/// Accumulated stage cost of a converged trace. Throws NotConverged.
ClosedLoopCost closed_loop_cost(const ClosedLoopTrace& trace, const TerminalIngredients& term);

/// CSV with columns t, x[0..n), u[0..m), stage_cost, value.
void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace);

}  // namespace grassmpc
