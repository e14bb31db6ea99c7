#pragma once

// Two-box geometry in the plane: targets (3,1) and (3,5) inside
// P1 = [2,4] x [0,2] and P2 = [2,4] x [4,6]. Only the diagonal line reaches both.

#include "grassmpc/design.hpp"

#include <cmath>

namespace grassmpc::bench {

inline Polytope toy_box(double y_lo, double y_hi) {
  return Polytope::box(Vector{{2.0, y_lo}}, Vector{{4.0, y_hi}});
}

/// Cloud symmetric about the diagonal: +-a along (1,1), +-b along (1,-1).
inline Matrix toy_cloud(double a, double b) {
  const Vector diag = Vector{{1.0, 1.0}} / std::sqrt(2.0);
  const Vector anti = Vector{{1.0, -1.0}} / std::sqrt(2.0);
  Matrix D(2, 4);
  D << a * diag, -a * diag, b * anti, -b * anti;
  return D;
}

inline DesignProblem toy_problem(const Matrix& deltas) {
  DesignProblem prob;
  prob.deltas = deltas;
  prob.centers = {Vector{{3.0, 1.0}}, Vector{{3.0, 5.0}}};
  prob.sets = {toy_box(0.0, 2.0), toy_box(4.0, 6.0)};
  prob.r = 1;
  return prob;
}

/// Admissible-set representation whose slice at state 0 is P1 and at state 1
/// is P2, so the two boxes become vertex sets of a scalar initial set.
inline AdmissibleSetRep toy_admissible() {
  const Polytope P1 = toy_box(0.0, 2.0), P2 = toy_box(4.0, 6.0);
  AdmissibleSetRep rep;
  rep.Gz = P1.G();
  rep.g0 = P1.g();
  rep.Ex = P2.g() - P1.g();
  return rep;
}

inline Matrix toy_vertices() { return Matrix{{0.0, 1.0}}; }

inline SubspacePair toy_pair(const Matrix& U) {
  return {U, Matrix::Zero(2, 1), Vector::Zero(2)};
}

}  // namespace grassmpc::bench
