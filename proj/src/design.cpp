#include "grassmpc/design.hpp"

#include "grassmpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace grassmpc {

Matrix DataSet::shifted(const Matrix& Gamma, const Vector& xi) const {
  require_dims(Gamma.rows() == Z.rows() && Gamma.cols() == X.rows() && xi.size() == Z.rows(),
               "offset dimensions do not match the data set");
  return (Z - Gamma * X).colwise() - xi;
}

DataSet generate_dataset(const CondensedProblem& cp, const Matrix& initial_vertices, int L,
                         std::uint64_t seed) {
  if (L < 1) throw InvalidArgument("data set size must be positive");
  const int n = cp.n();
  require_dims(initial_vertices.rows() == n && initial_vertices.cols() >= 1,
               "initial vertices must be n x k");
  const Vector lo = initial_vertices.rowwise().minCoeff();
  const Vector hi = initial_vertices.rowwise().maxCoeff();
  std::optional<Polytope> hull;
  if (n == 2 && initial_vertices.cols() >= 3) hull = hull_polytope_2d(initial_vertices);
  auto inside = [&](const Vector& x) {
    return hull ? hull->contains(x, 0.0) : in_convex_hull(initial_vertices, x, 0.0);
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DataSet data;
  data.X.resize(n, L);
  data.Z.resize(cp.d(), L);
  data.seed = seed;
  data.N = cp.setup.N;
  constexpr long stall_window = 1000000;
  long draws = 0;
  int accepted = 0;
  while (accepted < L) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
    ++draws;
    if (inside(x) && !cp.setup.term.Xf.contains(x, 0.0)) {
      const FullSolution sol = solve_full(cp, x);
      data.X.col(accepted) = x;
      data.Z.col(accepted) = sol.z;
      ++accepted;
    }
    if (draws >= stall_window && accepted < 1e-3 * static_cast<double>(draws))
      throw RejectionStall("acceptance rate below 0.1% in data generation");
  }
  return data;
}

OffsetFit fit_offset(const DataSet& data, const Vector& weights) {
  const int L = data.size();
  if (L < 1) throw InvalidArgument("empty data set");
  Vector w = weights.size() ? weights : Vector(Vector::Constant(L, 1.0 / L));
  require_dims(w.size() == L, "one weight per sample");
  if (w.minCoeff() < 0.0 || std::abs(w.sum() - 1.0) > 1e-12)
    throw InvalidArgument("weights must be nonnegative and sum to one");
  OffsetFit fit;
  fit.xi = data.Z * w;
  const Vector xbar = data.X * w;
  const Matrix Xs = data.X.colwise() - xbar;
  fit.Gamma = data.Z * pseudo_inverse(Xs, 1e-10);
  return fit;
}

GrassmannPoint::GrassmannPoint(Matrix U) : U_(std::move(U)) {
  const Matrix defect = U_.transpose() * U_ - Matrix::Identity(U_.cols(), U_.cols());
  if (U_.cols() < 1 || defect.norm() > 1e-10)
    throw InvalidArgument("Stiefel representative must have orthonormal columns");
  P_ = U_ * U_.transpose();
}

double subspace_distance(const Matrix& U1, const Matrix& U2) {
  require_dims(U1.rows() == U2.rows(), "subspaces live in different spaces");
  return (U1 * U1.transpose() - U2 * U2.transpose()).norm();
}

Matrix retract_qr(const Matrix& U, const Matrix& step) {
  require_dims(U.rows() == step.rows() && U.cols() == step.cols(), "step has wrong shape");
  return qr_orthonormalize(U + step);
}

double objective_f(const Matrix& U, const Matrix& deltas) {
  require_dims(U.rows() == deltas.rows(), "basis and data dimensions differ");
  return (deltas - U * (U.transpose() * deltas)).squaredNorm();
}

Matrix riemannian_grad_f(const Matrix& U, const Matrix& deltas) {
  require_dims(U.rows() == deltas.rows(), "basis and data dimensions differ");
  const Matrix SU = deltas * (deltas.transpose() * U);
  return -2.0 * (SU - U * (U.transpose() * SU));
}

Matrix pca_subspace(const Matrix& deltas, int r) {
  const int d = static_cast<int>(deltas.rows());
  require_dims(r >= 1 && r <= d, "subspace dimension must lie in [1, d]");
  const Matrix S = deltas * deltas.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  // Eigenvalues ascend; take the trailing columns, largest first.
  return es.eigenvectors().rightCols(r).rowwise().reverse();
}

void validate_design_problem(const DesignProblem& prob) {
  const int d = prob.d();
  require_dims(prob.r >= 1 && prob.r <= d, "subspace dimension must lie in [1, d]");
  require_dims(prob.centers.size() == prob.sets.size(), "one center per set");
  for (std::size_t j = 0; j < prob.sets.size(); ++j) {
    require_dims(prob.sets[j].dim() == d && prob.centers[j].size() == d,
                 "design sets must live in the shifted input space");
    const Polytope& P = prob.sets[j];
    const Vector slack = P.g() - P.G() * prob.centers[j];
    bool interior = true;
    for (Eigen::Index i = 0; i < slack.size(); ++i)
      interior = interior && (P.G().row(i).norm() > 1e-14 ? slack(i) > 0.0 : slack(i) >= -1e-9);
    if (!interior)
      throw InvalidArgument("center " + std::to_string(j) + " is not interior");
  }
}

DesignProblem make_design_problem(const AdmissibleSetRep& rep, const OffsetFit& offset,
                                  const Matrix& vertices, const Matrix& deltas, int r,
                                  CenterMethod method) {
  DesignProblem prob;
  prob.deltas = deltas;
  prob.r = r;
  for (Eigen::Index j = 0; j < vertices.cols(); ++j) {
    const Vector v = vertices.col(j);
    // Rows independent of z (e.g. the initial state constraint) carry no information.
    Polytope P = rep.at(v).translate(offset.Gamma * v + offset.xi).without_trivial_rows(1e-9);
    prob.centers.push_back(polytope_center(P, method));
    prob.sets.push_back(std::move(P));
  }
  validate_design_problem(prob);
  return prob;
}

AdmissibilityCertificate check_initial_admissibility(const AdmissibleSetRep& rep,
                                                     const SubspacePair& pair,
                                                     const Matrix& vertices, double tol) {
  validate_pair(pair, rep.dim(), rep.state_dim());
  require_dims(vertices.rows() == rep.state_dim(), "vertices must be states");
  const int r = pair.r();
  const Matrix GU = rep.Gz * pair.U;
  AdmissibilityCertificate cert;
  for (Eigen::Index j = 0; j < vertices.cols(); ++j) {
    const Vector v = vertices.col(j);
    const Vector rhs = rep.g0 + rep.Ex * v - rep.Gz * pair.offset(v);
    // Witness of largest margin: min t s.t. GU alpha - |row| t <= rhs, t >= -1.
    const Eigen::Index q = GU.rows();
    Matrix A = Matrix::Zero(q + 1, r + 1);
    Vector b(q + 1);
    A.topLeftCorner(q, r) = GU;
    A.block(0, r, q, 1) = -GU.rowwise().norm();
    b.head(q) = rhs;
    A(q, r) = -1.0;
    b(q) = 1.0;
    Vector c = Vector::Zero(r + 1);
    c(r) = 1.0;
    const SolveResult lp = solve_lp(c, A, b);
    Vector alpha = lp.optimal() ? Vector(lp.z.head(r)) : Vector();
    const bool ok = lp.optimal() && rep.max_violation(v, pair.U * alpha + pair.offset(v)) <= tol;
    if (!ok) {
      cert.violated_vertex = static_cast<int>(j);
      cert.witnesses.clear();
      return cert;
    }
    cert.witnesses.push_back(std::move(alpha));
  }
  cert.admissible = true;
  return cert;
}

namespace {

// Facet rows of all sets, normalized, with the target they constrain.
struct StackedConstraints {
  std::vector<Matrix> G;
  std::vector<Vector> g;
  std::vector<Eigen::Index> offset;
  Eigen::Index total = 0;
};

StackedConstraints stack_constraints(const DesignProblem& prob) {
  StackedConstraints sc;
  for (const auto& P : prob.sets) {
    Matrix G = P.G();
    Vector g = P.g();
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      const double nrm = G.row(i).norm();
      if (nrm > 0.0) {
        G.row(i) /= nrm;
        g(i) /= nrm;
      }
    }
    sc.offset.push_back(sc.total);
    sc.total += G.rows();
    sc.G.push_back(std::move(G));
    sc.g.push_back(std::move(g));
  }
  return sc;
}

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const DesignProblem& prob, StackedConstraints sc)
      : prob_(prob), sc_(std::move(sc)), S_(prob.deltas * prob.deltas.transpose()),
        trace_S_(S_.trace()) {}

  Vector constraints(const Matrix& U) const {
    Vector c(sc_.total);
    for (std::size_t j = 0; j < sc_.G.size(); ++j) {
      const Vector p = U * (U.transpose() * prob_.centers[j]);
      c.segment(sc_.offset[j], sc_.G[j].rows()) = sc_.G[j] * p - sc_.g[j];
    }
    return c;
  }

  double objective(const Matrix& U) const {
    return std::max(0.0, trace_S_ - (U.transpose() * S_ * U).trace());
  }

  double value(const Matrix& U, const Vector& lambda, double rho) const {
    const Vector c = constraints(U);
    const Vector w = (lambda + rho * c).cwiseMax(0.0);
    return objective(U) + (w.squaredNorm() - lambda.squaredNorm()) / (2.0 * rho);
  }

  Vector weights(const Matrix& U, const Vector& lambda, double rho) const {
    return (lambda + rho * constraints(U)).cwiseMax(0.0);
  }

  /// Euclidean gradient of f + sum w_k c_k in U.
  Matrix euclidean_gradient(const Matrix& U, const Vector& w) const {
    return -2.0 * (S_ * U) + symmetric_weight(w) * U;
  }

  /// Riemannian gradient of f + sum w_k c_k.
  Matrix gradient(const Matrix& U, const Vector& w) const {
    const Matrix E = euclidean_gradient(U, w);
    return E - U * (U.transpose() * E);
  }

  /// Riemannian Hessian of the penalized Lagrangian applied to a horizontal xi.
  Matrix hessian(const Matrix& U, const Vector& w, const Vector& curvature, const Matrix& E,
                 const Matrix& xi) const {
    Matrix D = -2.0 * (S_ * xi) + symmetric_weight(w) * xi;
    if (sc_.total > 0) {
      Vector wdot(sc_.total);
      for (std::size_t j = 0; j < sc_.G.size(); ++j) {
        const Vector& t = prob_.centers[j];
        const Vector pdot = xi * (U.transpose() * t) + U * (xi.transpose() * t);
        wdot.segment(sc_.offset[j], sc_.G[j].rows()) = sc_.G[j] * pdot;
      }
      D += symmetric_weight(curvature.cwiseProduct(wdot)) * U;
    }
    D -= U * (U.transpose() * D);
    return D - xi * (U.transpose() * E);
  }

  int worst_set(const Vector& c) const {
    int worst = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sc_.G.size(); ++j) {
      const double v = c.segment(sc_.offset[j], sc_.G[j].rows()).maxCoeff();
      if (v > best) {
        best = v;
        worst = static_cast<int>(j);
      }
    }
    return worst;
  }

 private:
  // W + W' with W = sum_j G_j' w_j t_j'.
  Matrix symmetric_weight(const Vector& w) const {
    const auto d = S_.rows();
    Matrix W = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < sc_.G.size(); ++j)
      W += (sc_.G[j].transpose() * w.segment(sc_.offset[j], sc_.G[j].rows())) *
           prob_.centers[j].transpose();
    return W + W.transpose();
  }

  const DesignProblem& prob_;
  StackedConstraints sc_;
  Matrix S_;
  double trace_S_;
};

double max_violation(const Vector& c) { return c.size() ? std::max(0.0, c.maxCoeff()) : 0.0; }

// Newton direction in coordinates of the horizontal space spanned by
// Uperp e_a e_b', with the Hessian spectrum reflected and floored to stay
// a descent direction.
Matrix newton_direction(const AugmentedLagrangian& al, const Matrix& U, const Vector& lambda,
                        double rho, const Matrix& grad) {
  const auto d = U.rows(), r = U.cols(), k = d - r;
  const Matrix Qfull = Eigen::HouseholderQR<Matrix>(U).householderQ();
  const Matrix Uperp = Qfull.rightCols(k);
  const Vector w = al.weights(U, lambda, rho);
  Vector curvature(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) curvature(i) = w(i) > 0.0 ? rho : 0.0;
  const Matrix E = al.euclidean_gradient(U, w);
  Matrix H(k * r, k * r);
  for (Eigen::Index b = 0; b < r; ++b) {
    for (Eigen::Index a = 0; a < k; ++a) {
      Matrix xi = Matrix::Zero(d, r);
      xi.col(b) = Uperp.col(a);
      const Matrix coords = Uperp.transpose() * al.hessian(U, w, curvature, E, xi);
      H.col(b * k + a) = Eigen::Map<const Vector>(coords.data(), k * r);
    }
  }
  H = (0.5 * (H + H.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Vector& ev = es.eigenvalues();
  const double floor = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  const Vector inv = ev.cwiseAbs().cwiseMax(floor).cwiseInverse();
  const Matrix gc = Uperp.transpose() * grad;
  const Vector y = -(es.eigenvectors() *
                     inv.asDiagonal() * (es.eigenvectors().transpose() *
                                         Eigen::Map<const Vector>(gc.data(), k * r)));
  return Uperp * Eigen::Map<const Matrix>(y.data(), k, r);
}

// Riemannian Newton iteration with Armijo backtracking along the QR
// retraction; a gradient step replaces a rejected Newton step.
int minimize_inner(const AugmentedLagrangian& al, Matrix& U, const Vector& lambda, double rho,
                   const RiemannianDesignConfig& cfg, double tol) {
  double value = al.value(U, lambda, rho);
  int it = 0;
  for (; it < cfg.inner_iterations; ++it) {
    const Matrix grad = al.gradient(U, al.weights(U, lambda, rho));
    const double gnorm2 = grad.squaredNorm();
    if (std::sqrt(gnorm2) <= tol) break;
    auto search = [&](const Matrix& dir, double t) {
      const double slope = (grad.array() * dir.array()).sum();
      for (int k = 0; k < 60 && slope < 0.0; ++k) {
        Matrix trial = retract_qr(U, t * dir);
        const double trial_value = al.value(trial, lambda, rho);
        if (trial_value <= value + cfg.armijo_c * t * slope) {
          U = std::move(trial);
          value = trial_value;
          return true;
        }
        t *= cfg.armijo_shrink;
      }
      return false;
    };
    if (search(newton_direction(al, U, lambda, rho, grad), 1.0)) continue;
    if (!search(-grad, 1.0 / std::sqrt(gnorm2))) break;  // no descent left
  }
  return it;
}

}  // namespace

RiemannianDesignResult design_subspace_riemannian(const DesignProblem& prob,
                                                  const RiemannianDesignConfig& cfg) {
  validate_design_problem(prob);
  if (prob.r >= prob.d()) throw InvalidArgument("design requires r < d");
  const AugmentedLagrangian al(prob, stack_constraints(prob));

  Matrix U = cfg.initial ? qr_orthonormalize(*cfg.initial) : pca_subspace(prob.deltas, prob.r);
  require_dims(U.rows() == prob.d() && U.cols() == prob.r, "initial basis has wrong shape");
  Vector c = al.constraints(U);
  Vector lambda = Vector::Zero(c.size());
  double rho = cfg.initial_penalty;
  double previous = max_violation(c);
  RiemannianDesignResult res;
  int stalled_at_cap = 0;

  for (int outer = 1; outer <= cfg.outer_iterations; ++outer) {
    res.inner_iterations += minimize_inner(al, U, lambda, rho, cfg, 0.1 * cfg.stationarity_tol);
    c = al.constraints(U);
    lambda = (lambda + rho * c).cwiseMax(0.0).cwiseMin(cfg.multiplier_cap);
    const double violation = max_violation(c);
    const double stationarity = al.gradient(U, lambda).norm();
    res.outer_iterations = outer;
    if (violation <= cfg.violation_tol && stationarity <= cfg.stationarity_tol) {
      res.U = U;
      res.objective = al.objective(U);
      res.max_violation = violation;
      res.stationarity = stationarity;
      res.penalty = rho;
      return res;
    }
    if (violation > cfg.violation_tol && violation > cfg.required_reduction * previous) {
      if (rho >= cfg.penalty_cap) {
        if (violation > cfg.infeasibility_tol && ++stalled_at_cap >= 3)
          throw InfeasibleDesign("no subspace meets all admissibility targets",
                                 al.worst_set(c), violation);
      }
      rho = std::min(rho * cfg.penalty_growth, cfg.penalty_cap);
    }
    previous = violation;
  }
  const double violation = max_violation(c);
  throw NonConvergence("augmented Lagrangian did not converge: violation " +
                       std::to_string(violation) + ", stationarity " +
                       std::to_string(al.gradient(U, lambda).norm()) + ", penalty " +
                       std::to_string(rho));
}

EuclideanDesignResult design_subspace_euclidean(const DesignProblem& prob, const Matrix& U_init,
                                                int max_iterations, double step_tol) {
  validate_design_problem(prob);
  const int d = prob.d(), r = prob.r;
  require_dims(U_init.rows() == d && U_init.cols() == r, "initial basis has wrong shape");
  if ((U_init.transpose() * U_init - Matrix::Identity(r, r)).norm() > 1e-10)
    throw InvalidArgument("initial basis must have orthonormal columns");

  EuclideanDesignResult res;
  Matrix U = U_init;
  const int nv = d * r;
  for (int k = 0; k < max_iterations; ++k) {
    // vec(U) column-major: U beta = (beta' kron I) vec(U).
    const Matrix beta = U.transpose() * prob.deltas;
    const Matrix B = beta * beta.transpose();
    QuadraticProgram qp;
    qp.H = Matrix::Zero(nv, nv);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        qp.H.block(a * d, b * d, d, d) = 2.0 * B(a, b) * Matrix::Identity(d, d);
    const Matrix lin = -2.0 * prob.deltas * beta.transpose();
    qp.f = Eigen::Map<const Vector>(lin.data(), nv);
    Eigen::Index rows = 0;
    for (const auto& P : prob.sets) rows += P.num_constraints();
    qp.G.resize(rows, nv);
    qp.g.resize(rows);
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < prob.sets.size(); ++j) {
      const Vector alpha = U.transpose() * prob.centers[j];
      const Polytope& P = prob.sets[j];
      for (int a = 0; a < r; ++a)
        qp.G.block(row, a * d, P.num_constraints(), d) = alpha(a) * P.G();
      qp.g.segment(row, P.num_constraints()) = P.g();
      row += P.num_constraints();
    }
    const SolveResult sol = solve_qp(qp);
    res.iterations = k + 1;
    if (sol.status == SolveStatus::Infeasible) {
      res.infeasible_iteration = k;
      res.U = U;
      return res;
    }
    if (!sol.optimal())
      throw NonConvergence(std::string("Euclidean subproblem ended with status ") +
                           to_string(sol.status));
    const Matrix next = qr_orthonormalize(Eigen::Map<const Matrix>(sol.z.data(), d, r));
    const double step = subspace_distance(U, next);
    U = next;
    res.feasible = true;
    if (step <= step_tol) {
      res.converged = true;
      break;
    }
  }
  res.U = U;
  return res;
}

}  // namespace grassmpc
