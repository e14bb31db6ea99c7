#pragma once

#include <Eigen/Dense>

#include <string>

namespace grassmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest eigenvalue magnitude.
double spectral_radius(const Matrix& M);

/// Smallest eigenvalue of the symmetric part of M.
double min_symmetric_eigenvalue(const Matrix& M);

bool is_symmetric(const Matrix& M, double tol = 1e-10);

/// Symmetric and smallest eigenvalue > tol.
bool is_positive_definite(const Matrix& M, double tol = 1e-10);

/// Moore-Penrose pseudoinverse via SVD, singular values below
/// rel_cutoff * sigma_max treated as zero.
Matrix pseudo_inverse(const Matrix& M, double rel_cutoff = 1e-10);

/// Orthonormal basis of the column space obtained from a thin QR
/// factorization, with column signs fixed so that diag(R) >= 0.
Matrix qr_orthonormalize(const Matrix& M);

/// Uniformly distributed orthogonal matrix of size k.
template <class Rng>
Matrix random_orthogonal(int k, Rng& rng);

void require_dims(bool ok, const std::string& what);

}  // namespace grassmpc

#include <random>

namespace grassmpc {

template <class Rng>
Matrix random_orthogonal(int k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) M(i, j) = normal(rng);
  return qr_orthonormalize(M);
}

}  // namespace grassmpc
