#pragma once

#include <cstdint>
#include <random>

namespace hyperclust {

// Generalized inverse Gaussian in the classical (lambda, chi, psi)
// parameterization: f(w) ∝ w^{lambda-1} exp(-(psi*w + chi/w)/2).
struct GigParams {
    double lambda = 0.0;
    double chi = 1.0;
    double psi = 1.0;
};

// Same law under the (lambda, eta, omega) parameterization with
// omega = sqrt(psi*chi) (concentration) and eta = sqrt(chi/psi) (scale).
struct GigBrowneParams {
    double lambda = 0.0;
    double eta = 1.0;
    double omega = 1.0;
};

GigBrowneParams to_browne(const GigParams& p);
GigParams to_classical(const GigBrowneParams& p);

void validate(const GigParams& p);

double gig_log_pdf(double w, const GigParams& p);

// E[W^alpha] = (chi/psi)^{alpha/2} K_{lambda+alpha}(sqrt(psi chi)) / K_lambda(...).
double gig_moment(double alpha, const GigParams& p);

// E[log W] = log sqrt(chi/psi) + d/dnu log K_nu(sqrt(psi chi)) at nu = lambda.
double gig_expect_log(const GigParams& p);

// Exact rejection sampler (Devroye 2014 uniform/exponential envelope on the
// log scale). Deterministic for a given generator state.
double gig_sample(const GigParams& p, std::mt19937_64& rng);

}  // namespace hyperclust
