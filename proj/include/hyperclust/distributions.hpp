#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hyperclust/gig.hpp"
#include "hyperclust/linalg.hpp"

namespace hyperclust {

// Generalized hyperbolic distribution under the concentration/index
// parameterization with the scale parameter fixed at 1; the mixing law is
// GIG(lambda, chi = omega, psi = omega).
struct GhdParams {
    double lambda = -0.5;
    double omega = 1.0;
    Vector mu;
    Matrix sigma;
    Vector beta;

    int dim() const { return static_cast<int>(mu.size()); }
};

// Generalized hyperbolic with free (chi, psi). psi may be exactly 0 only as
// the skew-t style conditional limit (then lambda < 0 is required); density
// evaluation routes through the inverse-gamma mixing branch in that case.
struct GhFullParams {
    double lambda = -0.5;
    double chi = 1.0;
    double psi = 1.0;
    Vector mu;
    Matrix sigma;
    Vector beta;

    int dim() const { return static_cast<int>(mu.size()); }
};

// Multivariate skew-t: mixing law InverseGamma(dof/2, dof/2).
struct StParams {
    double dof = 50.0;
    Vector mu;
    Matrix sigma;
    Vector beta;

    int dim() const { return static_cast<int>(mu.size()); }
};

void validate(const GhdParams& p);
void validate(const GhFullParams& p);
void validate(const StParams& p);

double ghd_log_density(const Vector& x, const GhdParams& p);
double gh_full_log_density(const Vector& x, const GhFullParams& p);
double st_log_density(const Vector& x, const StParams& p);

// Classical multivariate t log-density (location mu, scale sigma, dof v).
// Both the st and gh densities collapse onto this for vanishing skewness.
double mvt_log_density(const Vector& x, double dof, const Vector& mu, const Matrix& sigma);

// (mean, covariance) of the GHD.
struct MeanCov {
    Vector mean;
    Matrix cov;
};
MeanCov ghd_mean_cov(const GhdParams& p);

GhdParams affine(const GhdParams& p, const Matrix& B, const Vector& b);
StParams affine(const StParams& p, const Matrix& B, const Vector& b);

GhdParams marginal(const GhdParams& p, const std::vector<int>& idx);
StParams marginal(const StParams& p, const std::vector<int>& idx);

// Conditional law of the complement block given X[idx1] = x1 (Schur
// complement algebra); the result is a full GH law whose mixing parameters
// shift with the observed block.
GhFullParams conditional(const GhdParams& p, const std::vector<int>& idx1, const Vector& x1);
GhFullParams conditional(const StParams& p, const std::vector<int>& idx1, const Vector& x1);

Matrix sample_ghd(const GhdParams& p, int n, std::uint64_t seed);
Matrix sample_st(const StParams& p, int n, std::uint64_t seed);

}  // namespace hyperclust
