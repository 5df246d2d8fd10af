#include "hyperclust/special_math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hyperclust {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = the even part.
// Needed by the Temme series; |mu| <= 1/2.
void gamma_temme(double mu, double& gam1, double& gam2) {
    const double gp = 1.0 / std::tgamma(1.0 + mu);
    const double gm = 1.0 / std::tgamma(1.0 - mu);
    gam2 = 0.5 * (gp + gm);
    if (std::abs(mu) < 1e-5) {
        // odd part degenerates to -d/dmu [1/Gamma(1+mu)] at 0
        gam1 = -kEulerGamma;
    } else {
        gam1 = (gm - gp) / (2.0 * mu);
    }
}

// Temme's series for K_mu(x) and K_{mu+1}(x), |mu| <= 1/2, 0 < x <= 2.
void log_k_pair_series(double x, double mu, double& logk0, double& logk1) {
    constexpr int max_iter = 30000;
    const double eps = std::numeric_limits<double>::epsilon();
    const double pimu = kPi * mu;
    const double fact = (std::abs(pimu) < 1e-15) ? 1.0 : pimu / std::sin(pimu);
    const double d = -std::log(0.5 * x);
    double e = mu * d;
    const double fact2 = (std::abs(e) < 1e-15) ? 1.0 : std::sinh(e) / e;
    double gam1, gam2;
    gamma_temme(mu, gam1, gam2);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    const double gampl = gam2 - mu * gam1;  // 1/Gamma(1+mu)
    const double gammi = gam2 + mu * gam1;  // 1/Gamma(1-mu)
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    const double x2 = 0.25 * x * x;
    double sum1 = p;
    for (int i = 1; i <= max_iter; ++i) {
        ff = (i * ff + p + q) / (i * i - mu * mu);
        c *= x2 / i;
        p /= (i - mu);
        q /= (i + mu);
        const double del = c * ff;
        sum += del;
        const double del1 = c * (p - i * ff);
        sum1 += del1;
        if (std::abs(del) < std::abs(sum) * eps) break;
    }
    logk0 = std::log(sum);
    logk1 = std::log(2.0 * sum1 / x);
}

// Steed's continued fraction CF2 for K_mu(x) and K_{mu+1}(x), x > 2.
// Works directly in log scale: the e^{-x} factor never materializes.
void log_k_pair_cf2(double x, double mu, double& logk0, double& logk1) {
    constexpr int max_iter = 100000;
    const double eps = std::numeric_limits<double>::epsilon();
    const double mu2 = mu * mu;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= max_iter; ++i) {
        a -= 2 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    logk0 = 0.5 * std::log(kPi / (2.0 * x)) - x - std::log(s);
    logk1 = logk0 + std::log((mu + x + 0.5 - h) / x);
}

}  // namespace

double log_bessel_k(double order, double arg) {
    if (!std::isfinite(order) || !std::isfinite(arg) || arg <= 0.0) {
        throw std::domain_error("log_bessel_k: requires finite order and arg > 0, got order=" +
                                std::to_string(order) + " arg=" + std::to_string(arg));
    }
    const double nu = std::abs(order);
    const int nl = static_cast<int>(nu + 0.5);
    const double mu = nu - nl;  // in [-1/2, 1/2]

    double lk0, lk1;
    // Crossover at arg = 2: series below, continued fraction above.
    if (arg <= 2.0) {
        log_k_pair_series(arg, mu, lk0, lk1);
    } else {
        log_k_pair_cf2(arg, mu, lk0, lk1);
    }
    if (nl == 0) return lk0;

    // Upward recurrence K_{m+1} = (2m/x) K_m + K_{m-1} in log scale.
    // K is increasing in the order for orders >= 0, so the exp stays <= 1.
    double lkm1 = lk0, lkm = lk1;
    for (int j = 1; j < nl; ++j) {
        const double m = mu + j;
        const double lnext = lkm + std::log(2.0 * m / arg + std::exp(lkm1 - lkm));
        lkm1 = lkm;
        lkm = lnext;
    }
    return lkm;
}

double bessel_k_ratio(double order, double arg) {
    return std::exp(log_bessel_k(order + 1.0, arg) - log_bessel_k(order, arg));
}

double dlog_bessel_k_dorder(double order, double arg,
                            const BesselOrderDerivativeConfig& cfg) {
    if (!(cfg.step > 0.0) || !(cfg.step < 1.0)) {
        throw std::invalid_argument("dlog_bessel_k_dorder: step must lie in (0, 1)");
    }
    const double h = cfg.step;
    return (log_bessel_k(order + h, arg) - log_bessel_k(order - h, arg)) / (2.0 * h);
}

double digamma(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw std::domain_error("digamma: requires x > 0, got " + std::to_string(x));
    }
    double result = 0.0;
    // Shift into the asymptotic regime.
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic expansion with Bernoulli coefficients B_2..B_16.
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    static const double coef[] = {
        1.0 / 12.0,   -1.0 / 120.0,   1.0 / 252.0,     -1.0 / 240.0,
        1.0 / 132.0,  -691.0 / 32760.0, 1.0 / 12.0,    -3617.0 / 8160.0,
    };
    double pw = inv2;
    for (double ck : coef) {
        series += ck * pw;
        pw *= inv2;
    }
    result += std::log(x) - 0.5 * inv - series;
    return result;
}

}  // namespace hyperclust
