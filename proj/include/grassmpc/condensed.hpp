#pragma once

#include "grassmpc/admissible.hpp"
#include "grassmpc/solvers.hpp"

#include <optional>

namespace grassmpc {

/// J_N(x, z) = z'Hz + 2x'Fz + x'Cx over the admissible set U^N(x).
struct CondensedProblem {
  MpcSetup setup;
  Matrix H;  // d x d
  Matrix F;  // n x d
  Matrix C;  // n x n
  AdmissibleSetRep admissible;

  int n() const { return setup.n(); }
  int d() const { return setup.d(); }

  double cost(const Vector& x, const Vector& z) const;
  /// The QP in z for fixed x; its value omits the constant x'Cx.
  QuadraticProgram qp(const Vector& x) const;
};

/// Condensation of cost and constraints through the pre-stabilized dynamics.
CondensedProblem condense(const MpcSetup& setup);

struct FullSolution {
  Vector z;
  double value = 0.0;
};

/// Optimizer mu_N(x) and value V_N(x). Throws InfeasibleProblem when
/// U^N(x) is empty.
FullSolution solve_full(const CondensedProblem& cp, const Vector& x,
                        const std::optional<Vector>& warm = std::nullopt);

}  // namespace grassmpc
