#include "hyperclust/linalg.hpp"

#include <stdexcept>
#include <string>

namespace hyperclust {

Eigen::LLT<Matrix> safe_llt(const Matrix& sigma, bool* ridged) {
    if (ridged) *ridged = false;
    const int p = static_cast<int>(sigma.rows());
    if (p == 0 || sigma.cols() != p) {
        throw std::invalid_argument("safe_llt: matrix must be square and non-empty");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    const double ev_min = es.eigenvalues().minCoeff();
    const double ev_max = es.eigenvalues().maxCoeff();
    Matrix work = sigma;
    if (!(ev_min > 1e-10 * ev_max) || !(ev_max > 0.0)) {
        work.diagonal().array() += 1e-8 * sigma.trace() / p;
        if (ridged) *ridged = true;
    }
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() != Eigen::Success) {
        if (ridged) *ridged = true;
        work.diagonal().array() += 1e-8 * (std::abs(sigma.trace()) / p + 1.0);
        llt.compute(work);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("safe_llt: matrix is not positive definite after ridge");
        }
    }
    return llt;
}

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double mahalanobis_sq(const Eigen::LLT<Matrix>& llt, const Vector& diff) {
    return llt.matrixL().solve(diff).squaredNorm();
}

void require_symmetric(const Matrix& m, double tol, const char* what) {
    if (m.rows() != m.cols() || (m - m.transpose()).cwiseAbs().maxCoeff() > tol) {
        throw std::invalid_argument(std::string(what) + ": matrix must be symmetric");
    }
}

}  // namespace hyperclust
