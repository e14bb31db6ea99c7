#include "grassmpc/control.hpp"

#include "grassmpc/errors.hpp"

#include <cmath>
#include <complex>

namespace grassmpc {

void validate_system(const LinearSystem& sys) {
  const int n = sys.n(), m = sys.m();
  require_dims(sys.A.cols() == n, "A must be square");
  require_dims(sys.B.rows() == n, "B must have n rows");
  require_dims(sys.Q.rows() == n && sys.Q.cols() == n, "Q must be n x n");
  require_dims(sys.R.rows() == m && sys.R.cols() == m, "R must be m x m");
  if (!is_positive_definite(sys.Q, 1e-10)) throw InvalidArgument("Q must be symmetric positive definite");
  if (!is_positive_definite(sys.R, 1e-10)) throw InvalidArgument("R must be symmetric positive definite");
}

bool is_stabilizable(const Matrix& A, const Matrix& B, double tol) {
  const int n = static_cast<int>(A.rows());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.cast<std::complex<double>>());
  for (int i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0) continue;
    Eigen::MatrixXcd M(n, n + B.cols());
    M << A.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n),
        B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int k = 0; k < s.size(); ++k)
      if (s(k) > tol * std::max(1.0, s(0))) ++rank;
    if (rank < n) return false;
  }
  return true;
}

double stage_cost(const LinearSystem& sys, const Vector& x, const Vector& u) {
  return x.dot(sys.Q * x) + u.dot(sys.R * u);
}

namespace {

Matrix riccati_step(const LinearSystem& sys, const Matrix& P) {
  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  const Matrix S = sys.R + B.transpose() * P * B;
  const Matrix BtPA = B.transpose() * P * A;
  Matrix next = sys.Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA);
  return 0.5 * (next + next.transpose());
}

}  // namespace

double riccati_residual(const LinearSystem& sys, const Matrix& P) {
  return (P - riccati_step(sys, P)).norm();
}

LqrSolution dare_solve(const LinearSystem& sys, int max_iterations) {
  validate_system(sys);
  if (!is_stabilizable(sys.A, sys.B))
    throw NoStabilizingSolution("(A, B) is not stabilizable");
  Matrix P = sys.Q;
  bool converged = false;
  for (int it = 0; it < max_iterations; ++it) {
    Matrix next = riccati_step(sys, P);
    if (!next.allFinite()) break;
    const double diff = (next - P).norm();
    P = std::move(next);
    if (diff <= 1e-14 * std::max(1.0, P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged || riccati_residual(sys, P) > 1e-9)
    throw NoStabilizingSolution("Riccati iteration did not converge");
  const Matrix S = sys.R + sys.B.transpose() * P * sys.B;
  Matrix K = -S.ldlt().solve(sys.B.transpose() * P * sys.A);
  if (spectral_radius(sys.A + sys.B * K) >= 1.0)
    throw NoStabilizingSolution("Riccati fixed point is not stabilizing");
  return {P, K};
}

Matrix expm(const Matrix& M) {
  const int n = static_cast<int>(M.rows());
  require_dims(M.cols() == n, "matrix exponential needs a square matrix");
  const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix S = M / std::ldexp(1.0, squarings);
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 100; ++k) {
    term = term * S / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-14 * std::max(1.0, result.norm())) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

DiscreteModel discretize_zoh(const Matrix& Ac, const Matrix& Bc, double Ts) {
  if (!(Ts > 0.0)) throw InvalidArgument("sampling time must be positive");
  const int n = static_cast<int>(Ac.rows());
  const int m = static_cast<int>(Bc.cols());
  require_dims(Ac.cols() == n && Bc.rows() == n, "continuous model dimensions differ");
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = Ac * Ts;
  aug.topRightCorner(n, m) = Bc * Ts;
  const Matrix E = expm(aug);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

double terminal_cost(const TerminalIngredients& term, const Vector& x) {
  return x.dot(term.Pf * x);
}

Trajectory rollout(const LinearSystem& sys, const Matrix& K, const Vector& x0, const Vector& z) {
  const int n = sys.n(), m = sys.m();
  require_dims(x0.size() == n, "initial state has wrong dimension");
  require_dims(K.rows() == m && K.cols() == n, "feedback gain must be m x n");
  require_dims(m > 0 && z.size() % m == 0, "input sequence length is not a multiple of m");
  const int N = static_cast<int>(z.size() / m);
  Trajectory tr{Matrix(n, N + 1), Matrix(m, N)};
  tr.states.col(0) = x0;
  for (int k = 0; k < N; ++k) {
    const Vector x = tr.states.col(k);
    const Vector u = K * x + z.segment(k * m, m);
    tr.controls.col(k) = u;
    tr.states.col(k + 1) = sys.A * x + sys.B * u;
  }
  return tr;
}

double open_loop_cost(const LinearSystem& sys, const Matrix& K, const TerminalIngredients& term,
                      const Vector& x0, const Vector& z) {
  require_dims(term.Pf.rows() == sys.n() && term.Pf.cols() == sys.n(), "terminal weight must be n x n");
  const Trajectory tr = rollout(sys, K, x0, z);
  const int N = static_cast<int>(tr.controls.cols());
  double cost = terminal_cost(term, tr.states.col(N));
  for (int k = 0; k < N; ++k) cost += stage_cost(sys, tr.states.col(k), tr.controls.col(k));
  return cost;
}

}  // namespace grassmpc
