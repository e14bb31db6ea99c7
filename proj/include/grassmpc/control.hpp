#pragma once

#include "grassmpc/linalg.hpp"
#include "grassmpc/polytope.hpp"

namespace grassmpc {

/// x+ = Ax + Bu with stage cost l(x, u) = x'Qx + u'Ru.
struct LinearSystem {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
};

/// Dimensions consistent, Q and R symmetric positive definite.
void validate_system(const LinearSystem& sys);

/// Every eigenvalue with |lambda| >= 1 satisfies rank[A - lambda I, B] = n.
bool is_stabilizable(const Matrix& A, const Matrix& B, double tol = 1e-9);

double stage_cost(const LinearSystem& sys, const Vector& x, const Vector& u);

struct LqrSolution {
  Matrix P;  // stabilizing DARE solution
  Matrix K;  // u = Kx, A + BK Schur
};

/// Stabilizing solution of the discrete algebraic Riccati equation by value
/// iteration from P = Q. Throws NoStabilizingSolution.
LqrSolution dare_solve(const LinearSystem& sys, int max_iterations = 100000);

/// Frobenius norm of the Riccati fixed-point defect at P.
double riccati_residual(const LinearSystem& sys, const Matrix& P);

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
Matrix expm(const Matrix& M);

struct DiscreteModel {
  Matrix A;
  Matrix B;
};

/// Zero-order-hold discretization via the exponential of [[Ac, Bc], [0, 0]] Ts.
DiscreteModel discretize_zoh(const Matrix& Ac, const Matrix& Bc, double Ts);

/// Terminal cost x'Pf x, terminal law Kf x and terminal set Xf.
struct TerminalIngredients {
  Matrix Pf;
  Matrix Kf;
  Polytope Xf;
};

double terminal_cost(const TerminalIngredients& term, const Vector& x);

/// Pre-stabilized prediction: columns of states are x_z(0..N), columns of
/// controls are u_z(0..N-1).
struct Trajectory {
  Matrix states;
  Matrix controls;
};

/// x(k+1) = A x(k) + B (K x(k) + z_k), with z stacked as (z_0, ..., z_{N-1}).
Trajectory rollout(const LinearSystem& sys, const Matrix& K, const Vector& x0, const Vector& z);

/// V_f(x_z(N)) + sum_k l(x_z(k), u_z(k)).
double open_loop_cost(const LinearSystem& sys, const Matrix& K, const TerminalIngredients& term,
                      const Vector& x0, const Vector& z);

}  // namespace grassmpc
