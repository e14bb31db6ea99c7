#include "grassmpc/solvers.hpp"

#include "grassmpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace grassmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroRow = 1e-14;

// Constraints with unit-norm rows. Rows of G that vanish are checked once
// against their right-hand side and then dropped.
struct NormalizedConstraints {
  Matrix G;
  Vector g;
  Vector norms;
  std::vector<int> source;  // original row index of each kept row
  int violated_zero_row = -1;
};

NormalizedConstraints normalize(const Matrix& G, const Vector& g, double feas_tol) {
  NormalizedConstraints out;
  std::vector<int> keep;
  keep.reserve(G.rows());
  for (int i = 0; i < G.rows(); ++i) {
    const double nrm = G.row(i).norm();
    if (nrm <= kZeroRow) {
      if (g(i) < -feas_tol && out.violated_zero_row < 0) out.violated_zero_row = i;
      continue;
    }
    keep.push_back(i);
  }
  const int q = static_cast<int>(keep.size());
  out.G.resize(q, G.cols());
  out.g.resize(q);
  out.norms.resize(q);
  for (int k = 0; k < q; ++k) {
    const int i = keep[k];
    const double nrm = G.row(i).norm();
    out.G.row(k) = G.row(i) / nrm;
    out.g(k) = g(i) / nrm;
    out.norms(k) = nrm;
  }
  out.source = std::move(keep);
  return out;
}

Vector expand_duals(const NormalizedConstraints& nc, const Vector& lambda, int rows) {
  Vector y = Vector::Zero(rows);
  for (int k = 0; k < static_cast<int>(nc.source.size()); ++k)
    y(nc.source[k]) = lambda(k) / nc.norms(k);
  return y;
}

struct ActiveSetOutcome {
  SolveStatus status = SolveStatus::IterationCap;
  Vector z;
  Vector lambda;
  Vector ray;
  int iterations = 0;
};

// Primal active-set method for convex QPs with positive semidefinite H.
//
// The working set is kept linearly independent. On each working face the
// step is computed in the null space of the active rows: a Newton step on
// the positive-curvature part of the reduced Hessian, or a descent ray along
// its null space when the reduced gradient has a component there. With H = 0
// this reduces to a primal simplex-type method on the polytope.
// Rows of G must have unit norm and z must be feasible.
ActiveSetOutcome active_set(const Matrix& H, const Vector& f, const Matrix& G,
                            const Vector& g, Vector z, const SolverConfig& cfg,
                            int max_iterations) {
  const int n = static_cast<int>(z.size());
  const int q = static_cast<int>(G.rows());
  const double hscale = std::max(1.0, H.size() ? H.cwiseAbs().maxCoeff() : 0.0);
  const double curvature = cfg.curvature_tol * hscale;

  std::vector<int> working;
  std::vector<char> in_working(q, 0);
  bool at_minimum = false;
  bool bland = false;
  int stalled = 0;

  ActiveSetOutcome out;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const Vector grad = H * z + f;
    const int w = static_cast<int>(working.size());

    Matrix At(n, w);
    for (int k = 0; k < w; ++k) At.col(k) = G.row(working[k]).transpose();
    Eigen::HouseholderQR<Matrix> qr(At);

    Vector p = Vector::Zero(n);
    bool ray = false;
    if (!at_minimum && n - w > 0) {
      Matrix Z;
      if (w == 0) {
        Z = Matrix::Identity(n, n);
      } else {
        Matrix Q = qr.householderQ();
        Z = Q.rightCols(n - w);
      }
      const Matrix Hr = Z.transpose() * H * Z;
      const Vector gr = Z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<Matrix> es(Hr);
      const Vector coeff = es.eigenvectors().transpose() * gr;
      const Vector& mu = es.eigenvalues();
      const double grad_tol = 1e-13 * (1.0 + grad.cwiseAbs().maxCoeff());

      Vector flat = Vector::Zero(n - w);
      for (int k = 0; k < n - w; ++k)
        if (mu(k) <= curvature) flat(k) = coeff(k);
      if (flat.norm() > grad_tol) {
        p = -Z * (es.eigenvectors() * flat);
        ray = true;
      } else {
        Vector y = Vector::Zero(n - w);
        for (int k = 0; k < n - w; ++k)
          if (mu(k) > curvature) y(k) = -coeff(k) / mu(k);
        p = Z * (es.eigenvectors() * y);
      }
    }

    const double pnorm = p.norm();
    if (at_minimum || pnorm <= 1e-14 * (1.0 + z.norm())) {
      at_minimum = true;
      Vector lam_w = w ? Vector(qr.solve(-grad)) : Vector();
      int leave = -1;
      double most_negative = -cfg.multiplier_tol;
      for (int k = 0; k < w; ++k) {
        if (lam_w(k) >= -cfg.multiplier_tol) continue;
        if (bland) {
          if (leave < 0 || working[k] < working[leave]) leave = k;
        } else if (lam_w(k) < most_negative) {
          most_negative = lam_w(k);
          leave = k;
        }
      }
      if (leave < 0) {
        out.status = SolveStatus::Optimal;
        out.z = z;
        out.lambda = Vector::Zero(q);
        for (int k = 0; k < w; ++k) out.lambda(working[k]) = std::max(0.0, lam_w(k));
        return out;
      }
      in_working[working[leave]] = 0;
      working.erase(working.begin() + leave);
      at_minimum = false;
      continue;
    }

    double alpha = ray ? kInf : 1.0;
    int block = -1;
    double block_gp = 0.0;
    const Vector Gp = G * p;
    const Vector slack = g - G * z;
    for (int i = 0; i < q; ++i) {
      if (in_working[i]) continue;
      const double gp = Gp(i);
      if (gp <= 1e-12 * pnorm) continue;
      const double step = std::max(0.0, slack(i)) / gp;
      const bool tie = block >= 0 && std::abs(step - alpha) <= 1e-14 * (1.0 + alpha);
      if (tie) {
        if (bland ? i < block : gp > block_gp) {
          block = i;
          block_gp = gp;
        }
      } else if (step < alpha) {
        alpha = step;
        block = i;
        block_gp = gp;
      }
    }
    if (block < 0 && ray) {
      out.status = SolveStatus::Unbounded;
      out.z = z;
      out.ray = p;
      return out;
    }
    z += alpha * p;
    if (block >= 0) {
      working.push_back(block);
      in_working[block] = 1;
      at_minimum = false;
      if (alpha * pnorm <= 1e-14) {
        if (++stalled > 2 * n + 10) bland = true;
      } else {
        stalled = 0;
      }
    } else {
      at_minimum = true;
      stalled = 0;
    }
  }
  out.status = SolveStatus::IterationCap;
  out.z = z;
  return out;
}

int iteration_cap(const SolverConfig& cfg, int n, int q) {
  return cfg.max_iterations > 0 ? cfg.max_iterations : 50 * (n + q) + 100;
}

double max_violation(const NormalizedConstraints& nc, const Vector& z) {
  if (nc.G.rows() == 0) return -kInf;
  return (nc.G * z - nc.g).maxCoeff();
}

// Phase one on normalized rows: min t  s.t.  G z - t <= g,  t >= -1.
// Optimal with t <= feas_tol means a feasible point; otherwise the phase-one
// multipliers form a Farkas certificate.
SolveResult phase_one(const Matrix& G, const NormalizedConstraints& nc,
                      const Vector& start, const SolverConfig& cfg) {
  const int n = static_cast<int>(G.cols());
  SolveResult res;
  if (nc.violated_zero_row >= 0) {
    res.status = SolveStatus::Infeasible;
    res.certificate = Vector::Zero(G.rows());
    res.certificate(nc.violated_zero_row) = 1.0;
    return res;
  }
  const int q = static_cast<int>(nc.G.rows());
  if (q == 0 || max_violation(nc, start) <= 0.0) {
    res.status = SolveStatus::Optimal;
    res.z = start;
    return res;
  }
  Matrix Ga(q + 1, n + 1);
  Ga.setZero();
  Ga.topLeftCorner(q, n) = nc.G;
  Ga.col(n).head(q).setConstant(-1.0);
  Ga(q, n) = -1.0;
  Vector ga(q + 1);
  ga << nc.g, 1.0;
  // Row norms of Ga are not one; only ratios matter to the active-set core.
  const double s = std::sqrt(2.0);
  Ga.topRows(q) /= s;
  ga.head(q) /= s;

  Vector x0(n + 1);
  x0 << start, std::max(-1.0, max_violation(nc, start));
  Vector c = Vector::Zero(n + 1);
  c(n) = 1.0;
  const Matrix H0 = Matrix::Zero(n + 1, n + 1);
  ActiveSetOutcome lp =
      active_set(H0, c, Ga, ga, x0, cfg, iteration_cap(cfg, n + 1, q + 1));
  res.iterations = lp.iterations;
  if (lp.status != SolveStatus::Optimal) {
    res.status = SolveStatus::IterationCap;
    res.z = lp.z.head(n);
    return res;
  }
  const double t = lp.z(n);
  if (t <= cfg.feasibility_tol) {
    res.status = SolveStatus::Optimal;
    res.z = lp.z.head(n);
    return res;
  }
  Vector lam = lp.lambda.head(q) / s;
  res.status = SolveStatus::Infeasible;
  res.certificate = expand_duals(nc, lam, static_cast<int>(G.rows()));
  const double total = res.certificate.sum();
  if (total > 0.0) res.certificate /= total;
  res.z = lp.z.head(n);
  return res;
}

SolveResult finish(const QuadraticProgram& qp, const NormalizedConstraints& nc,
                   const ActiveSetOutcome& as, int phase_iterations) {
  SolveResult res;
  res.status = as.status;
  res.iterations = as.iterations + phase_iterations;
  res.z = as.z;
  res.value = 0.5 * as.z.dot(qp.H * as.z) + qp.f.dot(as.z);
  if (as.status == SolveStatus::Optimal) {
    res.duals = expand_duals(nc, as.lambda, static_cast<int>(qp.G.rows()));
    res.kkt_residual = kkt_residual(qp, res.z, res.duals);
  } else if (as.status == SolveStatus::Unbounded) {
    res.certificate = as.ray;
  }
  return res;
}

void validate(const QuadraticProgram& qp) {
  const auto n = qp.f.size();
  require_dims(qp.H.rows() == n && qp.H.cols() == n, "QP Hessian must be n x n");
  require_dims(qp.G.cols() == n || (qp.G.rows() == 0), "QP constraint matrix must have n columns");
  require_dims(qp.G.rows() == qp.g.size(), "QP constraint rows and rhs differ");
  if (!qp.H.allFinite() || !qp.f.allFinite() || !qp.G.allFinite() || !qp.g.allFinite())
    throw InvalidArgument("QP data must be finite");
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationCap: return "IterationCap";
  }
  return "?";
}

double kkt_residual(const QuadraticProgram& qp, const Vector& z, const Vector& duals) {
  Vector stat = qp.H * z + qp.f;
  double primal = 0.0, dual = 0.0, comp = 0.0;
  if (qp.G.rows() > 0) {
    stat += qp.G.transpose() * duals;
    const Vector slack = qp.g - qp.G * z;
    primal = std::max(0.0, -slack.minCoeff());
    dual = std::max(0.0, -duals.minCoeff());
    comp = duals.cwiseProduct(slack).cwiseAbs().maxCoeff();
  }
  const double s = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  return std::max({s, primal, dual, comp});
}

bool verify_farkas(const Matrix& G, const Vector& g, const Vector& y, double tol) {
  if (y.size() != G.rows() || y.size() == 0) return false;
  if (y.minCoeff() < 0.0) return false;
  const Vector yG = G.transpose() * y;
  return (yG.size() == 0 || yG.cwiseAbs().maxCoeff() <= tol) && y.dot(g) < -tol;
}

SolveResult find_feasible_point(const Matrix& G, const Vector& g, const SolverConfig& cfg) {
  require_dims(G.rows() == g.size(), "constraint rows and rhs differ");
  const NormalizedConstraints nc = normalize(G, g, cfg.feasibility_tol);
  return phase_one(G, nc, Vector::Zero(G.cols()), cfg);
}

SolveResult solve_qp(const QuadraticProgram& qp, const std::optional<Vector>& warm,
                     const SolverConfig& cfg) {
  validate(qp);
  const int n = static_cast<int>(qp.f.size());
  const NormalizedConstraints nc = normalize(qp.G, qp.g, cfg.feasibility_tol);

  Vector start = Vector::Zero(n);
  if (warm) {
    require_dims(warm->size() == n, "warm start has wrong dimension");
    start = *warm;
  }
  int phase_iterations = 0;
  if (nc.violated_zero_row >= 0 || max_violation(nc, start) > cfg.feasibility_tol) {
    SolveResult p1 = phase_one(qp.G, nc, start, cfg);
    if (p1.status != SolveStatus::Optimal) return p1;
    start = p1.z;
    phase_iterations = p1.iterations;
  }

  const int cap = iteration_cap(cfg, n, static_cast<int>(nc.G.rows()));
  ActiveSetOutcome as = active_set(qp.H, qp.f, nc.G, nc.g, start, cfg, cap);
  if (as.status != SolveStatus::Optimal) return finish(qp, nc, as, phase_iterations);

  const double hscale = std::max(1.0, qp.H.size() ? qp.H.cwiseAbs().maxCoeff() : 0.0);
  const bool singular =
      n > 0 && min_symmetric_eigenvalue(qp.H) <= cfg.curvature_tol * hscale;
  if (singular) {
    // Minimum-norm tie-break among the optimizers; value stays unregularized.
    const Matrix Hreg = qp.H + cfg.singular_regularization * Matrix::Identity(n, n);
    ActiveSetOutcome polished = active_set(Hreg, qp.f, nc.G, nc.g, as.z, cfg, cap);
    if (polished.status == SolveStatus::Optimal) {
      polished.iterations += as.iterations;
      as = polished;
    }
  }
  return finish(qp, nc, as, phase_iterations);
}

SolveResult solve_lp(const Vector& c, const Matrix& G, const Vector& g,
                     const SolverConfig& cfg) {
  const int n = static_cast<int>(c.size());
  QuadraticProgram qp{Matrix::Zero(n, n), c, G, g};
  validate(qp);
  const NormalizedConstraints nc = normalize(G, g, cfg.feasibility_tol);
  SolveResult p1 = phase_one(G, nc, Vector::Zero(n), cfg);
  if (p1.status != SolveStatus::Optimal) return p1;
  const int cap = iteration_cap(cfg, n, static_cast<int>(nc.G.rows()));
  ActiveSetOutcome as = active_set(qp.H, c, nc.G, nc.g, p1.z, cfg, cap);
  return finish(qp, nc, as, p1.iterations);
}

}  // namespace grassmpc
