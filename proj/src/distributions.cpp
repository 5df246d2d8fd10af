#include "hyperclust/distributions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hyperclust/special_math.hpp"

namespace hyperclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
constexpr double kSkewTol = 1e-12;  // beta' Sigma^{-1} beta below this counts as zero

void check_vectors(const Vector& mu, const Matrix& sigma, const Vector& beta, const char* what) {
    const auto p = mu.size();
    if (p == 0 || beta.size() != p || sigma.rows() != p || sigma.cols() != p) {
        throw std::invalid_argument(std::string(what) + ": inconsistent dimensions");
    }
    require_symmetric(sigma, 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()), what);
}

Matrix selector(const std::vector<int>& idx, int p) {
    Matrix B = Matrix::Zero(static_cast<int>(idx.size()), p);
    for (int r = 0; r < static_cast<int>(idx.size()); ++r) {
        if (idx[r] < 0 || idx[r] >= p) {
            throw std::invalid_argument("marginal: index out of range");
        }
        B(r, idx[r]) = 1.0;
    }
    return B;
}

std::vector<int> complement(const std::vector<int>& idx1, int p) {
    std::vector<char> in(p, 0);
    for (int i : idx1) {
        if (i < 0 || i >= p) throw std::invalid_argument("conditional: index out of range");
        in[i] = 1;
    }
    std::vector<int> rest;
    for (int i = 0; i < p; ++i) {
        if (!in[i]) rest.push_back(i);
    }
    return rest;
}

// Shared Schur-complement block algebra behind both conditional() overloads.
struct ConditionalBlocks {
    double delta1;   // (x1-mu1)' Sigma11^{-1} (x1-mu1)
    double skew1;    // beta1' Sigma11^{-1} beta1
    Vector mu_cond;
    Matrix sigma_cond;
    Vector beta_cond;
};

ConditionalBlocks conditional_blocks(const Vector& mu, const Matrix& sigma, const Vector& beta,
                                     const std::vector<int>& idx1, const Vector& x1) {
    const int p = static_cast<int>(mu.size());
    if (idx1.empty() || static_cast<int>(idx1.size()) >= p) {
        throw std::invalid_argument("conditional: idx1 must be a proper nonempty subset");
    }
    if (x1.size() != static_cast<Eigen::Index>(idx1.size())) {
        throw std::invalid_argument("conditional: x1 length does not match idx1");
    }
    const std::vector<int> idx2 = complement(idx1, p);
    const int d1 = static_cast<int>(idx1.size());
    const int d2 = static_cast<int>(idx2.size());

    Vector mu1(d1), mu2(d2), beta1(d1), beta2(d2);
    Matrix s11(d1, d1), s12(d1, d2), s22(d2, d2);
    for (int i = 0; i < d1; ++i) {
        mu1[i] = mu[idx1[i]];
        beta1[i] = beta[idx1[i]];
        for (int j = 0; j < d1; ++j) s11(i, j) = sigma(idx1[i], idx1[j]);
        for (int j = 0; j < d2; ++j) s12(i, j) = sigma(idx1[i], idx2[j]);
    }
    for (int i = 0; i < d2; ++i) {
        mu2[i] = mu[idx2[i]];
        beta2[i] = beta[idx2[i]];
        for (int j = 0; j < d2; ++j) s22(i, j) = sigma(idx2[i], idx2[j]);
    }

    const auto llt = safe_llt(s11);
    const Vector diff = x1 - mu1;
    const Matrix reg = llt.solve(s12).transpose();  // d2 x d1, = Sigma21 Sigma11^{-1}

    ConditionalBlocks out;
    out.delta1 = mahalanobis_sq(llt, diff);
    out.skew1 = beta1.dot(llt.solve(beta1));
    out.mu_cond = mu2 + reg * diff;
    out.sigma_cond = s22 - reg * s12;
    out.sigma_cond = 0.5 * (out.sigma_cond + out.sigma_cond.transpose());
    out.beta_cond = beta2 - reg * beta1;
    return out;
}

}  // namespace

void validate(const GhdParams& p) {
    check_vectors(p.mu, p.sigma, p.beta, "GhdParams");
    if (!(p.omega > 0.0)) throw std::invalid_argument("GhdParams: omega must be positive");
}

void validate(const GhFullParams& p) {
    check_vectors(p.mu, p.sigma, p.beta, "GhFullParams");
    if (!(p.chi > 0.0) || p.psi < 0.0) {
        throw std::invalid_argument("GhFullParams: chi must be positive and psi nonnegative");
    }
    if (p.psi == 0.0 && !(p.lambda < 0.0)) {
        throw std::invalid_argument("GhFullParams: psi = 0 requires lambda < 0");
    }
}

void validate(const StParams& p) {
    check_vectors(p.mu, p.sigma, p.beta, "StParams");
    if (!(p.dof > 0.0)) throw std::invalid_argument("StParams: dof must be positive");
}

double mvt_log_density(const Vector& x, double dof, const Vector& mu, const Matrix& sigma) {
    const int p = static_cast<int>(mu.size());
    const auto llt = safe_llt(sigma);
    const double delta = mahalanobis_sq(llt, x - mu);
    return std::lgamma(0.5 * (dof + p)) - std::lgamma(0.5 * dof) -
           0.5 * p * std::log(dof * 3.14159265358979323846) - 0.5 * log_det_from_llt(llt) -
           0.5 * (dof + p) * std::log1p(delta / dof);
}

double gh_full_log_density(const Vector& x, const GhFullParams& p) {
    validate(p);
    const int d = p.dim();
    if (x.size() != d) throw std::invalid_argument("gh_full_log_density: dimension mismatch");

    const auto llt = safe_llt(p.sigma);
    const Vector diff = x - p.mu;
    const double delta = mahalanobis_sq(llt, diff);
    const double skew = p.beta.dot(llt.solve(p.beta));
    const double lin = diff.dot(llt.solve(p.beta));
    const double logdet = log_det_from_llt(llt);
    const double half_order = p.lambda - 0.5 * d;

    if (p.psi > 0.0) {
        const double rate = p.psi + skew;
        return 0.5 * half_order * (std::log(p.chi + delta) - std::log(rate)) +
               0.5 * p.lambda * (std::log(p.psi) - std::log(p.chi)) +
               log_bessel_k(half_order, std::sqrt((p.chi + delta) * rate)) -
               0.5 * d * kLog2Pi - 0.5 * logdet -
               log_bessel_k(p.lambda, std::sqrt(p.chi * p.psi)) + lin;
    }

    // psi == 0: inverse-gamma mixing, IG(-lambda, chi/2).
    const double a0 = -p.lambda;
    if (skew > kSkewTol) {
        return 0.5 * half_order * (std::log(p.chi + delta) - std::log(skew)) +
               a0 * std::log(p.chi) - std::lgamma(a0) - (a0 - 1.0) * std::log(2.0) +
               log_bessel_k(half_order, std::sqrt((p.chi + delta) * skew)) -
               0.5 * d * kLog2Pi - 0.5 * logdet + lin;
    }
    // Degenerate skew as well: classical t with dof -2*lambda, scale chi/(-2*lambda) Sigma.
    const double dof = 2.0 * a0;
    return mvt_log_density(x, dof, p.mu, (p.chi / dof) * p.sigma);
}

double ghd_log_density(const Vector& x, const GhdParams& p) {
    validate(p);
    return gh_full_log_density(x, GhFullParams{p.lambda, p.omega, p.omega, p.mu, p.sigma, p.beta});
}

double st_log_density(const Vector& x, const StParams& p) {
    validate(p);
    const int d = p.dim();
    if (x.size() != d) throw std::invalid_argument("st_log_density: dimension mismatch");

    const auto llt = safe_llt(p.sigma);
    const double skew = p.beta.dot(llt.solve(p.beta));
    if (skew <= kSkewTol) {
        return mvt_log_density(x, p.dof, p.mu, p.sigma);
    }
    const Vector diff = x - p.mu;
    const double delta = mahalanobis_sq(llt, diff);
    const double v = p.dof;
    return -0.25 * (v + d) * (std::log(v + delta) - std::log(skew)) + 0.5 * v * std::log(v) +
           log_bessel_k(-0.5 * (v + d), std::sqrt((v + delta) * skew)) - 0.5 * d * kLog2Pi -
           0.5 * log_det_from_llt(llt) - std::lgamma(0.5 * v) - (0.5 * v - 1.0) * std::log(2.0) +
           diff.dot(llt.solve(p.beta));
}

MeanCov ghd_mean_cov(const GhdParams& p) {
    validate(p);
    const GigParams mix{p.lambda, p.omega, p.omega};
    const double ew = gig_moment(1.0, mix);
    const double ew2 = gig_moment(2.0, mix);
    const double vw = ew2 - ew * ew;
    return {p.mu + ew * p.beta, ew * p.sigma + vw * (p.beta * p.beta.transpose())};
}

GhdParams affine(const GhdParams& p, const Matrix& B, const Vector& b) {
    validate(p);
    if (B.cols() != p.dim() || b.size() != B.rows()) {
        throw std::invalid_argument("affine: dimension mismatch");
    }
    return {p.lambda, p.omega, B * p.mu + b, B * p.sigma * B.transpose(), B * p.beta};
}

StParams affine(const StParams& p, const Matrix& B, const Vector& b) {
    validate(p);
    if (B.cols() != p.dim() || b.size() != B.rows()) {
        throw std::invalid_argument("affine: dimension mismatch");
    }
    return {p.dof, B * p.mu + b, B * p.sigma * B.transpose(), B * p.beta};
}

GhdParams marginal(const GhdParams& p, const std::vector<int>& idx) {
    validate(p);
    if (idx.empty()) throw std::invalid_argument("marginal: index set must be nonempty");
    const Matrix B = selector(idx, p.dim());
    return affine(p, B, Vector::Zero(static_cast<int>(idx.size())));
}

StParams marginal(const StParams& p, const std::vector<int>& idx) {
    validate(p);
    if (idx.empty()) throw std::invalid_argument("marginal: index set must be nonempty");
    const Matrix B = selector(idx, p.dim());
    return affine(p, B, Vector::Zero(static_cast<int>(idx.size())));
}

GhFullParams conditional(const GhdParams& p, const std::vector<int>& idx1, const Vector& x1) {
    validate(p);
    const auto blocks = conditional_blocks(p.mu, p.sigma, p.beta, idx1, x1);
    GhFullParams out;
    out.lambda = p.lambda - 0.5 * static_cast<double>(idx1.size());
    out.chi = p.omega + blocks.delta1;
    out.psi = p.omega + blocks.skew1;
    out.mu = blocks.mu_cond;
    out.sigma = blocks.sigma_cond;
    out.beta = blocks.beta_cond;
    return out;
}

GhFullParams conditional(const StParams& p, const std::vector<int>& idx1, const Vector& x1) {
    validate(p);
    const auto blocks = conditional_blocks(p.mu, p.sigma, p.beta, idx1, x1);
    GhFullParams out;
    out.lambda = -0.5 * (p.dof + static_cast<double>(idx1.size()));
    out.chi = p.dof + blocks.delta1;
    out.psi = blocks.skew1 <= kSkewTol ? 0.0 : blocks.skew1;
    out.mu = blocks.mu_cond;
    out.sigma = blocks.sigma_cond;
    out.beta = blocks.beta_cond;
    return out;
}

Matrix sample_ghd(const GhdParams& p, int n, std::uint64_t seed) {
    validate(p);
    if (n < 1) throw std::invalid_argument("sample_ghd: n must be >= 1");
    const int d = p.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Matrix L = safe_llt(p.sigma).matrixL();
    const GigParams mix{p.lambda, p.omega, p.omega};
    Matrix out(n, d);
    Vector u(d);
    for (int i = 0; i < n; ++i) {
        const double w = gig_sample(mix, rng);
        for (int j = 0; j < d; ++j) u[j] = gauss(rng);
        out.row(i) = (p.mu + w * p.beta + std::sqrt(w) * (L * u)).transpose();
    }
    return out;
}

Matrix sample_st(const StParams& p, int n, std::uint64_t seed) {
    validate(p);
    if (n < 1) throw std::invalid_argument("sample_st: n must be >= 1");
    const int d = p.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::gamma_distribution<double> gamma(0.5 * p.dof, 2.0 / p.dof);
    const Matrix L = safe_llt(p.sigma).matrixL();
    Matrix out(n, d);
    Vector u(d);
    for (int i = 0; i < n; ++i) {
        const double w = 1.0 / gamma(rng);  // InverseGamma(dof/2, dof/2)
        for (int j = 0; j < d; ++j) u[j] = gauss(rng);
        out.row(i) = (p.mu + w * p.beta + std::sqrt(w) * (L * u)).transpose();
    }
    return out;
}

}  // namespace hyperclust
