#pragma once

#include "grassmpc/errors.hpp"
#include "grassmpc/linalg.hpp"

#include <optional>

namespace grassmpc {

/**
 * Tolerances shared by the dense LP and QP solvers.
 *
 * Feasibility is measured on row-normalized constraints, i.e. as a
 * Euclidean distance to each half-space.
 */
struct SolverConfig {
  double feasibility_tol = 1e-9;
  /// Multipliers above -multiplier_tol count as nonnegative.
  double multiplier_tol = 1e-11;
  /// Relative threshold below which a curvature is treated as zero.
  double curvature_tol = 1e-12;
  /// Required bound on the KKT residual of an optimal result.
  double kkt_tol = 1e-8;
  /// Tie-breaking regularization for singular Hessians (polish only).
  double singular_regularization = 1e-10;
  /// 0 selects 50 * (variables + constraints) + 100.
  int max_iterations = 0;
};

/// min 0.5 z'Hz + f'z  s.t.  Gz <= g
struct QuadraticProgram {
  Matrix H;
  Vector f;
  Matrix G;
  Vector g;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationCap };

const char* to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::IterationCap;
  Vector z;
  double value = 0.0;
  /// Multipliers of Gz <= g (nonnegative when Optimal).
  Vector duals;
  double kkt_residual = 0.0;
  /// Farkas certificate y >= 0, y'G = 0, y'g < 0 when Infeasible; descent
  /// ray when Unbounded; empty otherwise.
  Vector certificate;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Stationarity, primal/dual feasibility and complementarity of (z, duals),
/// combined in the max norm.
double kkt_residual(const QuadraticProgram& qp, const Vector& z, const Vector& duals);

/// Checks y >= 0, |y'G|_inf <= tol and y'g < -tol.
bool verify_farkas(const Matrix& G, const Vector& g, const Vector& y, double tol = 1e-9);

/// Minimizes c'z over Gz <= g.
SolveResult solve_lp(const Vector& c, const Matrix& G, const Vector& g,
                     const SolverConfig& cfg = {});

/// Finds any point of {z : Gz <= g}; Optimal means feasible.
SolveResult find_feasible_point(const Matrix& G, const Vector& g,
                                const SolverConfig& cfg = {});

/// Global minimizer of a convex QP (H positive semidefinite).
///
/// A feasible warm start skips phase one; it never changes the optimal value.
SolveResult solve_qp(const QuadraticProgram& qp,
                     const std::optional<Vector>& warm = std::nullopt,
                     const SolverConfig& cfg = {});

}  // namespace grassmpc
