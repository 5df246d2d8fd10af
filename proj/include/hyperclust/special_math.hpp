#pragma once

namespace hyperclust {

// Finite-difference step used for d/dnu log K_nu; must lie in (0, 1).
struct BesselOrderDerivativeConfig {
    double step = 1e-4;
};

// log K_nu(x), the modified Bessel function of the third kind, evaluated in
// log scale so that large arguments (x up to 1e4 and beyond) and large
// |order| do not overflow. K_{-nu} = K_nu, so the order is canonicalized to
// |nu| internally.
double log_bessel_k(double order, double arg);

// K_{order+1}(arg) / K_order(arg), computed as exp of a log difference.
double bessel_k_ratio(double order, double arg);

// Central finite difference of log K_nu(arg) in the order argument.
double dlog_bessel_k_dorder(double order, double arg,
                            const BesselOrderDerivativeConfig& cfg = {});

// psi(x) for x > 0.
double digamma(double x);

}  // namespace hyperclust
