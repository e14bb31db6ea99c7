#pragma once

#include "grassmpc/linalg.hpp"
#include "grassmpc/solvers.hpp"

namespace grassmpc {

/// H-representation {z : Gz <= g}.
class Polytope {
 public:
  Polytope() = default;
  Polytope(Matrix G, Vector g);

  /// Axis-aligned box lower <= z <= upper.
  static Polytope box(const Vector& lower, const Vector& upper);

  int dim() const { return static_cast<int>(G_.cols()); }
  int num_constraints() const { return static_cast<int>(G_.rows()); }
  const Matrix& G() const { return G_; }
  const Vector& g() const { return g_; }

  /// max(Gz - g), or -inf without constraints.
  double max_violation(const Vector& z) const;
  bool contains(const Vector& z, double tol = 1e-9) const;

  Polytope intersect(const Polytope& other) const;
  /// {x : Mx in P}.
  Polytope preimage(const Matrix& M) const;
  /// {z - offset : z in P}.
  Polytope translate(const Vector& offset) const;
  /// Drops rows whose normal vanishes once they are satisfied within tol.
  Polytope without_trivial_rows(double tol = 1e-9) const;

  bool is_empty() const;
  /// LP maximum of +-e_i'z is finite for every coordinate.
  bool is_bounded() const;

 private:
  Matrix G_;
  Vector g_;
};

bool contains(const Polytope& P, const Vector& z, double tol = 1e-9);

struct Center {
  Vector point;
  double radius = 0.0;
};

/// Center of the largest inscribed ball. Throws EmptyPolytope.
Center chebyshev_center(const Polytope& P);

/// Minimizer of the logarithmic barrier, started from the Chebyshev center.
/// Requires a nonempty interior.
Vector analytic_center(const Polytope& P);

enum class CenterMethod { Chebyshev, Analytic };

Vector polytope_center(const Polytope& P, CenterMethod method);

/// Maximum of c'z over P (+inf when unbounded). Throws EmptyPolytope.
double support(const Polytope& P, const Vector& c);

/// Removes rows implied by the others (LP test, tolerance on normalized rows).
Polytope remove_redundant(const Polytope& P, double tol = 1e-9);

/// P subset of Q, checked by one LP per row of Q.
bool is_subset(const Polytope& P, const Polytope& Q, double tol = 1e-9);

/// Two-sided containment.
bool equals(const Polytope& P, const Polytope& Q, double tol = 1e-9);

/// Largest subset of Xc that is positively invariant under x+ = Acl x.
Polytope max_invariant_set(const Matrix& Acl, const Polytope& Xc, int max_steps = 500);

}  // namespace grassmpc
