#include "grassmpc/polytope.hpp"

#include "grassmpc/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace grassmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Polytope normalized_rows(const Polytope& P) {
  Matrix G = P.G();
  Vector g = P.g();
  for (int i = 0; i < G.rows(); ++i) {
    const double n = G.row(i).norm();
    if (n > 1e-14) {
      G.row(i) /= n;
      g(i) /= n;
    }
  }
  return Polytope(G, g);
}

}  // namespace

Polytope::Polytope(Matrix G, Vector g) : G_(std::move(G)), g_(std::move(g)) {
  require_dims(G_.rows() == g_.size(), "polytope rows and rhs differ");
  if (!G_.allFinite() || !g_.allFinite()) throw InvalidArgument("polytope data must be finite");
}

Polytope Polytope::box(const Vector& lower, const Vector& upper) {
  require_dims(lower.size() == upper.size(), "box bounds differ in size");
  const auto n = lower.size();
  Matrix G(2 * n, n);
  G << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Vector g(2 * n);
  g << upper, -lower;
  return Polytope(G, g);
}

double Polytope::max_violation(const Vector& z) const {
  require_dims(z.size() == dim(), "point dimension differs from polytope");
  if (G_.rows() == 0) return -kInf;
  return (G_ * z - g_).maxCoeff();
}

bool Polytope::contains(const Vector& z, double tol) const { return max_violation(z) <= tol; }

bool contains(const Polytope& P, const Vector& z, double tol) { return P.contains(z, tol); }

Polytope Polytope::intersect(const Polytope& other) const {
  require_dims(other.dim() == dim(), "intersecting polytopes of different dimension");
  Matrix G(G_.rows() + other.G_.rows(), dim());
  G << G_, other.G_;
  Vector g(g_.size() + other.g_.size());
  g << g_, other.g_;
  return Polytope(G, g);
}

Polytope Polytope::preimage(const Matrix& M) const {
  require_dims(M.rows() == dim(), "preimage map has wrong output dimension");
  return Polytope(G_ * M, g_);
}

Polytope Polytope::translate(const Vector& offset) const {
  require_dims(offset.size() == dim(), "translation has wrong dimension");
  return Polytope(G_, g_ - G_ * offset);
}

Polytope Polytope::without_trivial_rows(double tol) const {
  std::vector<int> keep;
  for (int i = 0; i < G_.rows(); ++i) {
    if (G_.row(i).norm() > 1e-14) {
      keep.push_back(i);
    } else if (g_(i) < -tol) {
      return *this;  // keep the inconsistency visible
    }
  }
  Matrix G(keep.size(), dim());
  Vector g(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    G.row(k) = G_.row(keep[k]);
    g(k) = g_(keep[k]);
  }
  return Polytope(G, g);
}

bool Polytope::is_empty() const {
  return find_feasible_point(G_, g_).status == SolveStatus::Infeasible;
}

bool Polytope::is_bounded() const {
  for (int i = 0; i < dim(); ++i) {
    for (double s : {1.0, -1.0}) {
      Vector c = Vector::Zero(dim());
      c(i) = -s;
      if (solve_lp(c, G_, g_).status == SolveStatus::Unbounded) return false;
    }
  }
  return true;
}

Center chebyshev_center(const Polytope& P) {
  const Polytope Q = normalized_rows(P.without_trivial_rows());
  const int n = Q.dim();
  const int q = Q.num_constraints();
  Matrix G(q + 1, n + 1);
  G.setZero();
  G.topLeftCorner(q, n) = Q.G();
  for (int i = 0; i < q; ++i) G(i, n) = Q.G().row(i).norm();
  G(q, n) = -1.0;
  Vector g(q + 1);
  g << Q.g(), 0.0;
  Vector c = Vector::Zero(n + 1);
  c(n) = -1.0;
  SolveResult res = solve_lp(c, G, g);
  if (res.status == SolveStatus::Infeasible) throw EmptyPolytope("Chebyshev center of empty polytope");
  if (res.status == SolveStatus::Unbounded) throw InvalidArgument("Chebyshev center of unbounded polytope");
  if (!res.optimal()) throw NonConvergence("Chebyshev center LP did not converge");
  return {res.z.head(n), res.z(n)};
}

Vector analytic_center(const Polytope& P) {
  const Polytope Q = normalized_rows(P.without_trivial_rows());
  const Center start = chebyshev_center(Q);
  if (start.radius <= 1e-12) throw EmptyPolytope("analytic center needs a nonempty interior");
  const Matrix& G = Q.G();
  const Vector& g = Q.g();
  Vector z = start.point;
  auto barrier = [&](const Vector& x) {
    const Vector s = g - G * x;
    if (s.minCoeff() <= 0.0) return kInf;
    return -s.array().log().sum();
  };
  for (int it = 0; it < 200; ++it) {
    const Vector s = g - G * z;
    const Vector inv = s.cwiseInverse();
    const Vector grad = G.transpose() * inv;
    const Matrix hess = G.transpose() * inv.cwiseAbs2().asDiagonal() * G;
    const Vector step = -hess.ldlt().solve(grad);
    const double decrement = -grad.dot(step);
    if (decrement <= 1e-20) break;
    double t = 1.0;
    const double f0 = barrier(z);
    while (barrier(z + t * step) > f0 - 0.25 * t * decrement && t > 1e-12) t *= 0.5;
    z += t * step;
  }
  return z;
}

Vector polytope_center(const Polytope& P, CenterMethod method) {
  return method == CenterMethod::Analytic ? analytic_center(P) : chebyshev_center(P).point;
}

double support(const Polytope& P, const Vector& c) {
  require_dims(c.size() == P.dim(), "support direction has wrong dimension");
  SolveResult res = solve_lp(-c, P.G(), P.g());
  if (res.status == SolveStatus::Infeasible) throw EmptyPolytope("support of empty polytope");
  if (res.status == SolveStatus::Unbounded) return kInf;
  if (!res.optimal()) throw NonConvergence("support LP did not converge");
  return -res.value;
}

Polytope remove_redundant(const Polytope& P, double tol) {
  const Polytope Q = normalized_rows(P.without_trivial_rows(tol));
  const int n = Q.dim();
  if (Q.is_empty()) throw EmptyPolytope("redundancy removal on empty polytope");

  std::vector<int> kept;
  std::vector<char> active(Q.num_constraints(), 1);
  // Exact duplicates first; they defeat the LP test.
  for (int i = 0; i < Q.num_constraints(); ++i)
    for (int j = 0; j < i && active[i]; ++j)
      if (active[j] && (Q.G().row(i) - Q.G().row(j)).cwiseAbs().maxCoeff() <= 1e-12) {
        if (Q.g()(i) >= Q.g()(j) - 1e-12) active[i] = 0;
        else active[j] = 0;
      }

  for (int i = 0; i < Q.num_constraints(); ++i) {
    if (!active[i]) continue;
    int rows = 0;
    for (int j = 0; j < Q.num_constraints(); ++j) rows += active[j] ? 1 : 0;
    Matrix G(rows, n);
    Vector g(rows);
    int k = 0;
    for (int j = 0; j < Q.num_constraints(); ++j) {
      if (!active[j]) continue;
      G.row(k) = Q.G().row(j);
      g(k) = (j == i) ? Q.g()(j) + 1.0 : Q.g()(j);
      ++k;
    }
    SolveResult res = solve_lp(-Q.G().row(i).transpose(), G, g);
    if (res.optimal() && -res.value <= Q.g()(i) + tol) active[i] = 0;
  }
  for (int i = 0; i < Q.num_constraints(); ++i)
    if (active[i]) kept.push_back(i);
  Matrix G(kept.size(), n);
  Vector g(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    G.row(k) = Q.G().row(kept[k]);
    g(k) = Q.g()(kept[k]);
  }
  return Polytope(G, g);
}

bool is_subset(const Polytope& P, const Polytope& Q, double tol) {
  require_dims(P.dim() == Q.dim(), "subset test across dimensions");
  for (int i = 0; i < Q.num_constraints(); ++i) {
    const double nrm = Q.G().row(i).norm();
    SolveResult res = solve_lp(-Q.G().row(i).transpose(), P.G(), P.g());
    if (res.status == SolveStatus::Infeasible) return true;
    if (res.status == SolveStatus::Unbounded) return false;
    if (!res.optimal()) throw NonConvergence("containment LP did not converge");
    if (-res.value > Q.g()(i) + tol * std::max(1.0, nrm)) return false;
  }
  return true;
}

bool equals(const Polytope& P, const Polytope& Q, double tol) {
  return is_subset(P, Q, tol) && is_subset(Q, P, tol);
}

Polytope max_invariant_set(const Matrix& Acl, const Polytope& Xc, int max_steps) {
  require_dims(Acl.rows() == Xc.dim() && Acl.cols() == Xc.dim(),
               "closed-loop matrix does not match constraint set");
  Polytope omega = remove_redundant(Xc);
  for (int step = 0; step < max_steps; ++step) {
    const Polytope pre = omega.preimage(Acl);
    if (is_subset(omega, pre)) return omega;
    omega = remove_redundant(omega.intersect(pre));
  }
  throw IterationCapExceeded("maximal invariant set did not converge");
}

}  // namespace grassmpc
