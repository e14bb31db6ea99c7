#include "grassmpc/admissible.hpp"

#include "grassmpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace grassmpc {

MpcSetup MpcSetup::with_horizon(int horizon) const {
  MpcSetup copy = *this;
  copy.N = horizon;
  return copy;
}

TerminalIngredients lqr_terminal_ingredients(const LinearSystem& sys, const Polytope& X,
                                             const Polytope& U) {
  require_dims(X.dim() == sys.n() && U.dim() == sys.m(), "constraint sets do not match system");
  const LqrSolution lqr = dare_solve(sys);
  const Polytope Xc = X.intersect(U.preimage(lqr.K));
  Polytope Xf = max_invariant_set(sys.A + sys.B * lqr.K, Xc);
  return {lqr.P, lqr.K, std::move(Xf)};
}

MpcSetup make_lqr_setup(const LinearSystem& sys, const Polytope& X, const Polytope& U, int N) {
  TerminalIngredients term = lqr_terminal_ingredients(sys, X, U);
  MpcSetup setup{sys, X, U, term.Kf, std::move(term), N};
  validate_setup(setup);
  return setup;
}

namespace {

// Bounding box of a compact polytope from 2n support LPs.
std::pair<Vector, Vector> bounding_box(const Polytope& P) {
  const int n = P.dim();
  Vector lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    hi(i) = support(P, e);
    lo(i) = -support(P, -e);
  }
  return {lo, hi};
}

}  // namespace

TerminalCheck check_terminal_ingredients(const MpcSetup& setup, int samples, std::uint64_t seed) {
  const auto& sys = setup.sys;
  const auto& term = setup.term;
  TerminalCheck check;
  check.weight_positive_definite = is_positive_definite(term.Pf, 1e-10);
  check.inside_state_set = is_subset(term.Xf, setup.X);
  check.origin_interior = term.Xf.max_violation(Vector::Zero(sys.n())) < -1e-12;
  const Matrix Acl = sys.A + sys.B * term.Kf;
  check.invariant = is_subset(term.Xf, term.Xf.preimage(Acl));
  check.input_admissible = is_subset(term.Xf, setup.U.preimage(term.Kf));

  const auto [lo, hi] = bounding_box(term.Xf);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  int accepted = 0;
  for (int draw = 0; draw < 100 * samples && accepted < samples; ++draw) {
    Vector x(sys.n());
    for (int i = 0; i < sys.n(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
    if (!term.Xf.contains(x, 0.0)) continue;
    ++accepted;
    const Vector u = term.Kf * x;
    const Vector next = Acl * x;
    const double margin = terminal_cost(term, x) - terminal_cost(term, next) - stage_cost(sys, x, u);
    worst = std::min(worst, margin / std::max(1.0, terminal_cost(term, x)));
  }
  check.worst_decrease_margin = accepted ? worst : 0.0;
  return check;
}

void validate_setup(const MpcSetup& setup) {
  validate_system(setup.sys);
  const int n = setup.n(), m = setup.m();
  if (setup.N < 1) throw InvalidArgument("horizon must be positive");
  require_dims(setup.X.dim() == n, "state set dimension differs from n");
  require_dims(setup.U.dim() == m, "input set dimension differs from m");
  require_dims(setup.K.rows() == m && setup.K.cols() == n, "feedback gain must be m x n");
  require_dims(setup.term.Pf.rows() == n && setup.term.Pf.cols() == n, "terminal weight must be n x n");
  require_dims(setup.term.Kf.rows() == m && setup.term.Kf.cols() == n, "terminal gain must be m x n");
  require_dims(setup.term.Xf.dim() == n, "terminal set dimension differs from n");
  if (spectral_radius(setup.sys.A + setup.sys.B * setup.K) >= 1.0)
    throw InvalidArgument("pre-stabilizing gain does not stabilize (A, B)");
  if (setup.X.max_violation(Vector::Zero(n)) >= 0.0 || !setup.X.is_bounded())
    throw InvalidArgument("state set must be compact with the origin in its interior");
  if (setup.U.max_violation(Vector::Zero(m)) >= 0.0 || !setup.U.is_bounded())
    throw InvalidArgument("input set must be compact with the origin in its interior");
  if (!check_terminal_ingredients(setup).ok())
    throw InvalidArgument("terminal ingredients violate the invariance or decrease conditions");
}

Prediction prediction_matrices(const MpcSetup& setup) {
  const auto& sys = setup.sys;
  const int n = setup.n(), m = setup.m(), N = setup.N, d = setup.d();
  const Matrix Phi = sys.A + sys.B * setup.K;
  Prediction p{Matrix::Zero(n * (N + 1), n), Matrix::Zero(n * (N + 1), d),
               Matrix::Zero(m * N, n), Matrix::Zero(m * N, d)};
  p.Sx.topRows(n) = Matrix::Identity(n, n);
  for (int k = 0; k < N; ++k) {
    const Matrix Sxk = p.Sx.middleRows(k * n, n);
    const Matrix Suk = p.Su.middleRows(k * n, n);
    p.Kx.middleRows(k * m, m) = setup.K * Sxk;
    p.Kz.middleRows(k * m, m) = setup.K * Suk;
    p.Kz.block(k * m, k * m, m, m) += Matrix::Identity(m, m);
    p.Sx.middleRows((k + 1) * n, n) = Phi * Sxk;
    p.Su.middleRows((k + 1) * n, n) = Phi * Suk;
    p.Su.block((k + 1) * n, k * m, n, m) += sys.B;
  }
  return p;
}

AdmissibleSetRep admissible_set(const MpcSetup& setup) {
  require_dims(setup.X.dim() == setup.n() && setup.U.dim() == setup.m() &&
                   setup.term.Xf.dim() == setup.n() && setup.K.rows() == setup.m() &&
                   setup.K.cols() == setup.n(),
               "setup dimensions are inconsistent");
  const int n = setup.n(), m = setup.m(), N = setup.N, d = setup.d();
  const Prediction p = prediction_matrices(setup);
  const int qx = setup.X.num_constraints(), qu = setup.U.num_constraints();
  const int qf = setup.term.Xf.num_constraints();
  const int rows = N * (qx + qu) + qf;
  AdmissibleSetRep rep{Matrix(rows, d), Matrix(rows, n), Vector(rows)};
  int r = 0;
  for (int k = 0; k < N; ++k) {
    rep.Gz.middleRows(r, qx) = setup.X.G() * p.Su.middleRows(k * n, n);
    rep.Ex.middleRows(r, qx) = -setup.X.G() * p.Sx.middleRows(k * n, n);
    rep.g0.segment(r, qx) = setup.X.g();
    r += qx;
    rep.Gz.middleRows(r, qu) = setup.U.G() * p.Kz.middleRows(k * m, m);
    rep.Ex.middleRows(r, qu) = -setup.U.G() * p.Kx.middleRows(k * m, m);
    rep.g0.segment(r, qu) = setup.U.g();
    r += qu;
  }
  rep.Gz.middleRows(r, qf) = setup.term.Xf.G() * p.Su.middleRows(N * n, n);
  rep.Ex.middleRows(r, qf) = -setup.term.Xf.G() * p.Sx.middleRows(N * n, n);
  rep.g0.segment(r, qf) = setup.term.Xf.g();
  return rep;
}

Polytope AdmissibleSetRep::at(const Vector& x) const {
  require_dims(x.size() == state_dim(), "state has wrong dimension");
  return Polytope(Gz, g0 + Ex * x);
}

double AdmissibleSetRep::max_violation(const Vector& x, const Vector& z) const {
  require_dims(x.size() == state_dim() && z.size() == dim(), "admissibility test dimensions");
  return (Gz * z - g0 - Ex * x).maxCoeff();
}

bool AdmissibleSetRep::contains(const Vector& x, const Vector& z, double tol) const {
  return max_violation(x, z) <= tol;
}

bool admissible_by_rollout(const MpcSetup& setup, const Vector& x, const Vector& z, double tol) {
  const Trajectory tr = rollout(setup.sys, setup.K, x, z);
  for (int k = 0; k < setup.N; ++k) {
    if (!setup.X.contains(tr.states.col(k), tol)) return false;
    if (!setup.U.contains(tr.controls.col(k), tol)) return false;
  }
  return setup.term.Xf.contains(tr.states.col(setup.N), tol);
}

bool is_feasible_state(const AdmissibleSetRep& rep, const Vector& x) {
  return find_feasible_point(rep.Gz, rep.g0 + rep.Ex * x).optimal();
}

double max_feasible_radius(const AdmissibleSetRep& rep, const Vector& direction) {
  require_dims(direction.size() == rep.state_dim(), "ray direction has wrong dimension");
  const int d = rep.dim();
  const int q = static_cast<int>(rep.Gz.rows());
  Matrix G(q + 1, d + 1);
  G.topLeftCorner(q, d) = rep.Gz;
  G.topRightCorner(q, 1) = -rep.Ex * direction;
  G.row(q).setZero();
  G(q, d) = -1.0;
  Vector g(q + 1);
  g << rep.g0, 0.0;
  Vector c = Vector::Zero(d + 1);
  c(d) = -1.0;
  const SolveResult res = solve_lp(c, G, g);
  if (res.status == SolveStatus::Infeasible) throw OriginInfeasible("admissible set at the origin is empty");
  if (res.status == SolveStatus::Unbounded) throw InvalidArgument("feasible set is unbounded along a ray");
  if (!res.optimal()) throw NonConvergence("ray-shooting LP did not converge");
  return res.z(d);
}

Matrix feasible_set_inner(const MpcSetup& setup, int directions) {
  if (setup.n() != 2) throw InvalidArgument("ray shooting needs a planar state space");
  if (directions < 3) throw InvalidArgument("at least three ray directions are needed");
  const AdmissibleSetRep rep = admissible_set(setup);
  if (!is_feasible_state(rep, Vector::Zero(2)))
    throw OriginInfeasible("admissible set at the origin is empty");
  Matrix points(2, directions);
  for (int i = 0; i < directions; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / directions;
    const Vector dir{{std::cos(theta), std::sin(theta)}};
    points.col(i) = max_feasible_radius(rep, dir) * dir;
  }
  return convex_hull_2d(points);
}

Matrix convex_hull_2d(const Matrix& points, double tol) {
  require_dims(points.rows() == 2, "planar hull needs 2 x k points");
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < points.cols(); ++i) pts.emplace_back(points.col(i));
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return (a - b).norm() <= 1e-14; }),
            pts.end());
  if (pts.size() < 3) throw InvalidArgument("hull needs at least three distinct points");
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.norm());
  const double eps = tol * std::max(1.0, scale * scale);
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= eps) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  Matrix out(2, hull.size());
  for (std::size_t i = 0; i < hull.size(); ++i) out.col(i) = hull[i];
  return out;
}

Polytope hull_polytope_2d(const Matrix& vertices) {
  require_dims(vertices.rows() == 2, "planar hull needs 2 x k vertices");
  const int s = static_cast<int>(vertices.cols());
  Matrix G(s, 2);
  Vector g(s);
  for (int i = 0; i < s; ++i) {
    const Vector a = vertices.col(i);
    const Vector b = vertices.col((i + 1) % s);
    Vector normal{{b(1) - a(1), a(0) - b(0)}};
    normal /= normal.norm();
    G.row(i) = normal.transpose();
    g(i) = normal.dot(a);
  }
  return Polytope(G, g);
}

bool in_convex_hull(const Matrix& vertices, const Vector& x, double tol) {
  require_dims(vertices.rows() == x.size(), "hull membership dimension");
  const int n = static_cast<int>(vertices.rows());
  const int s = static_cast<int>(vertices.cols());
  Matrix G(s + 2 * n + 2, s);
  Vector g(s + 2 * n + 2);
  G.topRows(s) = -Matrix::Identity(s, s);
  g.head(s).setZero();
  G.middleRows(s, n) = vertices;
  g.segment(s, n) = x + Vector::Constant(n, tol);
  G.middleRows(s + n, n) = -vertices;
  g.segment(s + n, n) = -x + Vector::Constant(n, tol);
  G.row(s + 2 * n).setOnes();
  g(s + 2 * n) = 1.0;
  G.row(s + 2 * n + 1).setConstant(-1.0);
  g(s + 2 * n + 1) = -1.0;
  return find_feasible_point(G, g).optimal();
}

}  // namespace grassmpc
