#include "grassmpc/linalg.hpp"

#include "grassmpc/errors.hpp"

#include <algorithm>

namespace grassmpc {

double spectral_radius(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_symmetric_eigenvalue(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Matrix S = (0.5 * (M + M.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Matrix& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_definite(const Matrix& M, double tol) {
  return is_symmetric(M, tol) && min_symmetric_eigenvalue(M) > tol;
}

Matrix pseudo_inverse(const Matrix& M, double rel_cutoff) {
  if (M.size() == 0) return Matrix::Zero(M.cols(), M.rows());
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = rel_cutoff * (s.size() ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix qr_orthonormalize(const Matrix& M) {
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
  const Matrix R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < M.cols(); ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

}  // namespace grassmpc
