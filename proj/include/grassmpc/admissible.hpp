#pragma once

#include "grassmpc/control.hpp"
#include "grassmpc/linalg.hpp"
#include "grassmpc/polytope.hpp"

#include <cstdint>

namespace grassmpc {

/// Plant, constraint sets, pre-stabilizing gain, terminal ingredients and
/// horizon of one constrained finite-time optimal control problem.
struct MpcSetup {
  LinearSystem sys;
  Polytope X;
  Polytope U;
  Matrix K;
  TerminalIngredients term;
  int N = 1;

  int n() const { return sys.n(); }
  int m() const { return sys.m(); }
  int d() const { return N * sys.m(); }

  MpcSetup with_horizon(int horizon) const;
};

/// Terminal ingredients of the unconstrained LQR controller: Pf = P_inf,
/// Kf = K_inf and Xf the maximal invariant subset of X cap {K_inf x in U}.
TerminalIngredients lqr_terminal_ingredients(const LinearSystem& sys, const Polytope& X,
                                             const Polytope& U);

/// LQR terminal ingredients with K = K_inf as pre-stabilizing gain.
MpcSetup make_lqr_setup(const LinearSystem& sys, const Polytope& X, const Polytope& U, int N);

struct TerminalCheck {
  bool weight_positive_definite = false;
  bool inside_state_set = false;
  bool origin_interior = false;
  bool invariant = false;
  bool input_admissible = false;
  /// Smallest V_f(x) - V_f(x+) - l(x, Kf x) over the samples.
  double worst_decrease_margin = 0.0;

  bool ok(double tol = 1e-9) const {
    return weight_positive_definite && inside_state_set && origin_interior && invariant &&
           input_admissible && worst_decrease_margin >= -tol;
  }
};

/// Verifies the terminal ingredients; the Lyapunov decrease is sampled on Xf.
TerminalCheck check_terminal_ingredients(const MpcSetup& setup, int samples = 1000,
                                         std::uint64_t seed = 1);

/// Throws InvalidArgument / DimensionMismatch when the setup is inconsistent.
void validate_setup(const MpcSetup& setup);

/// Stacked affine prediction: x_z(k, x) = Sx_k x + Su_k z and
/// u_z(k, x) = Kx_k x + Kz_k z, blocks stacked over k.
struct Prediction {
  Matrix Sx;  // n(N+1) x n
  Matrix Su;  // n(N+1) x d
  Matrix Kx;  // mN x n
  Matrix Kz;  // mN x d
};

Prediction prediction_matrices(const MpcSetup& setup);

/// U^N(x) = {z : Gz z <= g0 + Ex x}.
struct AdmissibleSetRep {
  Matrix Gz;
  Matrix Ex;
  Vector g0;

  int dim() const { return static_cast<int>(Gz.cols()); }
  int state_dim() const { return static_cast<int>(Ex.cols()); }
  Polytope at(const Vector& x) const;
  double max_violation(const Vector& x, const Vector& z) const;
  bool contains(const Vector& x, const Vector& z, double tol = 1e-9) const;
};

AdmissibleSetRep admissible_set(const MpcSetup& setup);

/// Rollout-based admissibility test, independent of AdmissibleSetRep.
bool admissible_by_rollout(const MpcSetup& setup, const Vector& x, const Vector& z,
                           double tol = 1e-9);

/// U^N(x) is nonempty.
bool is_feasible_state(const AdmissibleSetRep& rep, const Vector& x);

/// Inner approximation of the feasible set for n = 2: maximal feasible
/// radius along equally spaced rays, returned as convex-hull vertices in
/// counter-clockwise order (one column each). Throws OriginInfeasible.
Matrix feasible_set_inner(const MpcSetup& setup, int directions);

/// Maximal rho with U^N(rho * direction) nonempty.
double max_feasible_radius(const AdmissibleSetRep& rep, const Vector& direction);

/// Counter-clockwise hull vertices of planar points, collinear points removed.
Matrix convex_hull_2d(const Matrix& points, double tol = 1e-12);

/// Half-space form of a counter-clockwise planar hull.
Polytope hull_polytope_2d(const Matrix& vertices);

/// x in conv(columns of vertices), by LP feasibility in the weights.
bool in_convex_hull(const Matrix& vertices, const Vector& x, double tol = 1e-9);

}  // namespace grassmpc
