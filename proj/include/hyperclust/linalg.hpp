#pragma once

#include <Eigen/Dense>

namespace hyperclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cholesky with the shared ridge policy: if the matrix is numerically
// non-SPD (min eigenvalue < 1e-10 * max, or the factorization fails), a
// ridge of 1e-8 * trace/p is added once before decomposing. `ridged`, when
// non-null, records whether that happened.
Eigen::LLT<Matrix> safe_llt(const Matrix& sigma, bool* ridged = nullptr);

// log |Sigma| from a Cholesky factor.
double log_det_from_llt(const Eigen::LLT<Matrix>& llt);

// (x - mu)' Sigma^{-1} (x - mu) from a Cholesky factor.
double mahalanobis_sq(const Eigen::LLT<Matrix>& llt, const Vector& diff);

void require_symmetric(const Matrix& m, double tol, const char* what);

}  // namespace hyperclust
