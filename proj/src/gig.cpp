#include "hyperclust/gig.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hyperclust/special_math.hpp"

namespace hyperclust {

void validate(const GigParams& p) {
    if (!(p.chi > 0.0) || !(p.psi > 0.0) || !std::isfinite(p.lambda) ||
        !std::isfinite(p.chi) || !std::isfinite(p.psi)) {
        throw std::invalid_argument("GigParams: chi and psi must be positive and finite");
    }
}

GigBrowneParams to_browne(const GigParams& p) {
    validate(p);
    return {p.lambda, std::sqrt(p.chi / p.psi), std::sqrt(p.psi * p.chi)};
}

GigParams to_classical(const GigBrowneParams& p) {
    if (!(p.eta > 0.0) || !(p.omega > 0.0)) {
        throw std::invalid_argument("GigBrowneParams: eta and omega must be positive");
    }
    return {p.lambda, p.omega * p.eta, p.omega / p.eta};
}

double gig_log_pdf(double w, const GigParams& p) {
    validate(p);
    if (!(w > 0.0)) {
        throw std::domain_error("gig_log_pdf: w must be positive");
    }
    const double z = std::sqrt(p.psi * p.chi);
    return 0.5 * p.lambda * (std::log(p.psi) - std::log(p.chi)) +
           (p.lambda - 1.0) * std::log(w) - std::log(2.0) - log_bessel_k(p.lambda, z) -
           0.5 * (p.psi * w + p.chi / w);
}

double gig_moment(double alpha, const GigParams& p) {
    validate(p);
    const double z = std::sqrt(p.psi * p.chi);
    return std::exp(0.5 * alpha * (std::log(p.chi) - std::log(p.psi)) +
                    log_bessel_k(p.lambda + alpha, z) - log_bessel_k(p.lambda, z));
}

double gig_expect_log(const GigParams& p) {
    validate(p);
    const double z = std::sqrt(p.psi * p.chi);
    return 0.5 * (std::log(p.chi) - std::log(p.psi)) + dlog_bessel_k_dorder(p.lambda, z);
}

namespace {

// Envelope pieces for Devroye's sampler: the target on the log scale is
// proportional to exp(psi_fn(t)) with psi_fn concave, psi_fn(0) = 0.
double psi_fn(double t, double alpha, double lam) {
    return -alpha * (std::cosh(t) - 1.0) - lam * (std::exp(t) - t - 1.0);
}

double dpsi_fn(double t, double alpha, double lam) {
    return -alpha * std::sinh(t) - lam * (std::exp(t) - 1.0);
}

}  // namespace

double gig_sample(const GigParams& params, std::mt19937_64& rng) {
    validate(params);
    double lam = params.lambda;
    const double omega = std::sqrt(params.psi * params.chi);
    const double eta = std::sqrt(params.chi / params.psi);

    bool swap = false;
    if (lam < 0.0) {
        lam = -lam;
        swap = true;  // 1/X ~ GIG(-lambda, omega) in the two-parameter form
    }
    const double alpha = std::sqrt(omega * omega + lam * lam) - lam;

    // Choose t > 0 and s > 0 bracketing the concave hump of psi_fn.
    double t;
    double v = -psi_fn(1.0, alpha, lam);
    if (v >= 0.5 && v <= 2.0) {
        t = 1.0;
    } else if (v > 2.0) {
        t = std::sqrt(2.0 / (alpha + lam));
    } else {
        t = std::log(4.0 / (alpha + 2.0 * lam));
    }

    double s;
    v = -psi_fn(-1.0, alpha, lam);
    if (v >= 0.5 && v <= 2.0) {
        s = 1.0;
    } else if (v > 2.0) {
        s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + lam));
    } else {
        const double a_term = std::log(1.0 + 1.0 / alpha + std::sqrt(1.0 / (alpha * alpha) + 2.0 / alpha));
        s = (lam > 0.0) ? std::min(1.0 / lam, a_term) : a_term;
    }

    const double eta_e = -psi_fn(t, alpha, lam);
    const double zeta = -dpsi_fn(t, alpha, lam);
    const double theta = -psi_fn(-s, alpha, lam);
    const double xi = dpsi_fn(-s, alpha, lam);

    const double pp = 1.0 / xi;
    const double rr = 1.0 / zeta;
    const double td = t - rr * eta_e;
    const double sd = s - pp * theta;
    const double qq = td + sd;

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double x = 0.0;
    for (;;) {
        const double u = unif(rng);
        const double w = unif(rng);
        const double r = unif(rng);
        if (u < qq / (pp + qq + rr)) {
            x = -sd + qq * w;
        } else if (u < (qq + rr) / (pp + qq + rr)) {
            x = td - rr * std::log(w);
        } else {
            x = -sd + pp * std::log(w);
        }
        double envelope;
        if (x >= -sd && x <= td) {
            envelope = 1.0;
        } else if (x > td) {
            envelope = std::exp(-eta_e - zeta * (x - t));
        } else {
            envelope = std::exp(-theta + xi * (x + s));
        }
        if (r * envelope <= std::exp(psi_fn(x, alpha, lam))) break;
    }

    double out = std::exp(x) * (lam / omega + std::sqrt(1.0 + (lam / omega) * (lam / omega)));
    if (swap) out = 1.0 / out;
    return out * eta;
}

}  // namespace hyperclust
