#pragma once

#include "grassmpc/condensed.hpp"
#include "grassmpc/reduced.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace grassmpc {

/// Samples (x_i, z_i = mu_N(x_i)) stored column-wise.
struct DataSet {
  Matrix X;  // n x L
  Matrix Z;  // d x L
  std::uint64_t seed = 0;
  int N = 0;

  int size() const { return static_cast<int>(X.cols()); }
  /// delta_i = z_i - (Gamma x_i + xi), column-wise.
  Matrix shifted(const Matrix& Gamma, const Vector& xi) const;
};

/// Uniform rejection sampling over conv(initial_vertices) minus Xf.
/// Throws RejectionStall when fewer than 0.1% of 10^6 draws are accepted.
DataSet generate_dataset(const CondensedProblem& cp, const Matrix& initial_vertices, int L,
                         std::uint64_t seed);

struct OffsetFit {
  Matrix Gamma;
  Vector xi;
};

/// xi = sum w_i z_i, Gamma = Z pinv([x_i - xbar]) with xbar = sum w_i x_i.
/// Empty weights mean uniform.
OffsetFit fit_offset(const DataSet& data, const Vector& weights = Vector());

/// Point of Gr(r, d) with a Stiefel representative and its projector.
class GrassmannPoint {
 public:
  /// Throws InvalidArgument unless U has orthonormal columns (1e-10).
  explicit GrassmannPoint(Matrix U);

  const Matrix& U() const { return U_; }
  const Matrix& projector() const { return P_; }
  int d() const { return static_cast<int>(U_.rows()); }
  int r() const { return static_cast<int>(U_.cols()); }

 private:
  Matrix U_;
  Matrix P_;
};

/// Frobenius distance between projectors.
double subspace_distance(const Matrix& U1, const Matrix& U2);

/// q-factor of U + step with nonnegative diag(R).
Matrix retract_qr(const Matrix& U, const Matrix& step);

/// f(U) = sum |delta_i - U U' delta_i|^2.
double objective_f(const Matrix& U, const Matrix& deltas);

/// Horizontal gradient -2 (I - UU') S U with S = sum delta_i delta_i'.
Matrix riemannian_grad_f(const Matrix& U, const Matrix& deltas);

/// Top-r eigenvectors of sum delta_i delta_i'.
Matrix pca_subspace(const Matrix& deltas, int r);

/// Targets delta_bar_j that U U' must map into the polytopes P_j.
struct DesignProblem {
  Matrix deltas;
  std::vector<Vector> centers;
  std::vector<Polytope> sets;
  int r = 1;

  int d() const { return static_cast<int>(deltas.rows()); }
};

/// Checks dimensions and that every center is strictly inside its set.
void validate_design_problem(const DesignProblem& prob);

/// Shifted admissible sets U^N(v_j) - sigma0(v_j) at the given vertices and
/// their centers.
DesignProblem make_design_problem(const AdmissibleSetRep& rep, const OffsetFit& offset,
                                  const Matrix& vertices, const Matrix& deltas, int r,
                                  CenterMethod method = CenterMethod::Chebyshev);

struct AdmissibilityCertificate {
  bool admissible = false;
  /// alpha_j with U alpha_j + sigma(v_j) in U^N(v_j), one per vertex.
  std::vector<Vector> witnesses;
  /// First vertex without a witness, -1 if none.
  int violated_vertex = -1;
};

/// Vertex-wise witness search; the certificate covers conv(vertices).
AdmissibilityCertificate check_initial_admissibility(const AdmissibleSetRep& rep,
                                                     const SubspacePair& pair,
                                                     const Matrix& vertices,
                                                     double tol = 1e-9);

struct RiemannianDesignConfig {
  double initial_penalty = 10.0;
  double penalty_growth = 5.0;
  /// Penalty grows unless the violation shrank below this fraction.
  double required_reduction = 0.25;
  double penalty_cap = 1e8;
  double multiplier_cap = 1e8;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int inner_iterations = 500;
  int outer_iterations = 200;
  double violation_tol = 1e-6;
  double stationarity_tol = 1e-4;
  /// Violation above which a capped penalty is reported as infeasible.
  double infeasibility_tol = 1e-4;
  /// Start point; the PCA subspace when empty.
  std::optional<Matrix> initial;
};

struct RiemannianDesignResult {
  Matrix U;
  double objective = 0.0;
  double max_violation = 0.0;
  double stationarity = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double penalty = 0.0;
};

/// min f(U U') s.t. G_j U U' delta_bar_j <= g_j by an augmented Lagrangian on
/// the Grassmann manifold. Throws InfeasibleDesign or NonConvergence.
RiemannianDesignResult design_subspace_riemannian(const DesignProblem& prob,
                                                  const RiemannianDesignConfig& cfg = {});

struct EuclideanDesignResult {
  bool feasible = false;
  /// Iteration whose convex subproblem was infeasible, -1 if none.
  int infeasible_iteration = -1;
  int iterations = 0;
  bool converged = false;
  Matrix U;
};

/// Alternation that freezes alpha_j = U_k' delta_bar_j and solves a convex QP
/// in U, then re-orthonormalizes.
EuclideanDesignResult design_subspace_euclidean(const DesignProblem& prob, const Matrix& U_init,
                                                int max_iterations = 100,
                                                double step_tol = 1e-8);

}  // namespace grassmpc
