#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hyperclust/distributions.hpp"
#include "oracles.hpp"

using namespace hyperclust;

namespace {

Matrix random_spd(int p, std::mt19937_64& rng, double jitter = 0.3) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = gauss(rng);
    Matrix s = a * a.transpose() / p;
    s.diagonal().array() += jitter;
    return s;
}

Vector random_vec(int p, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector v(p);
    for (int i = 0; i < p; ++i) v[i] = scale * unif(rng);
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("distributions");

TEST_CASE("ghd density: symmetry at zero skewness, agreement with the full form") {
    std::mt19937_64 rng(31);
    GhdParams p;
    p.lambda = -0.5;
    p.omega = 4.0;
    p.mu = random_vec(3, rng, 1.0);
    p.sigma = random_spd(3, rng);
    p.beta = Vector::Zero(3);
    for (int i = 0; i < 50; ++i) {
        const Vector d = random_vec(3, rng, 2.0);
        CHECK(ghd_log_density(p.mu + d, p) ==
              doctest::Approx(ghd_log_density(p.mu - d, p)).epsilon(1e-12));
    }

    GhdParams q = p;
    q.lambda = 1.2;
    q.beta = random_vec(3, rng, 1.0);
    const Vector x = random_vec(3, rng, 2.0);
    const GhFullParams full{q.lambda, q.omega, q.omega, q.mu, q.sigma, q.beta};
    CHECK(ghd_log_density(x, q) == doctest::Approx(gh_full_log_density(x, full)).epsilon(1e-12));
}

TEST_CASE("2-D ghd density integrates to one") {
    GhdParams p;
    p.lambda = -0.5;
    p.omega = 6.0;
    p.mu = Vector::Zero(2);
    p.sigma = Matrix::Identity(2, 2);
    p.beta = Vector::Ones(2);
    auto logf = [&](double x, double y) {
        Vector v(2);
        v << x, y;
        return ghd_log_density(v, p);
    };
    const double mass = oracle::integrate_2d_exp(logf, -25.0, 35.0, -25.0, 35.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("gh_full density: MC mixture representation and 1-D normalization") {
    std::mt19937_64 rng(57);
    GhFullParams p;
    p.lambda = 0.8;
    p.chi = 2.0;
    p.psi = 1.5;
    p.mu = Vector::Zero(2);
    p.sigma = random_spd(2, rng);
    p.beta = random_vec(2, rng, 0.8);

    // Average of N(mu + w beta, w Sigma) over w ~ GIG should reproduce the density.
    const GigParams mix{p.lambda, p.chi, p.psi};
    Vector x(2);
    x << 0.7, -0.4;
    const int n = 1000000;
    std::mt19937_64 sampler_rng(7);
    double acc = 0.0;
    const Eigen::LLT<Matrix> llt(p.sigma);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    for (int i = 0; i < n; ++i) {
        const double w = gig_sample(mix, sampler_rng);
        const Vector diff = x - p.mu - w * p.beta;
        const double maha = llt.matrixL().solve(diff).squaredNorm() / w;
        acc += std::exp(-0.5 * (maha + 2.0 * std::log(2.0 * M_PI) + logdet + 2.0 * std::log(w)));
    }
    CHECK(acc / n == doctest::Approx(std::exp(gh_full_log_density(x, p))).epsilon(1e-2));

    // 1-D normalization
    GhFullParams q;
    q.lambda = -1.1;
    q.chi = 1.4;
    q.psi = 2.3;
    q.mu = Vector::Zero(1);
    q.sigma = Matrix::Identity(1, 1);
    q.beta = Vector::Ones(1) * 0.7;
    auto f = [&](double t) {
        Vector v(1);
        v << t;
        const double lf = gh_full_log_density(v, q);
        return lf > -745.0 ? std::exp(lf) : 0.0;
    };
    CHECK(oracle::integrate(f, -60.0, 80.0, 1e-10, 52) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("skew-t density: beta -> 0 limit matches the classical t") {
    std::mt19937_64 rng(61);
    StParams p;
    p.dof = 6.5;
    p.mu = random_vec(3, rng, 1.0);
    p.sigma = random_spd(3, rng);

    // Shrinking the skew walks the Eq.-12 branch onto the classical t.
    for (int i = 0; i < 10; ++i) {
        const Vector x = random_vec(3, rng, 3.0);
        const double t_ref = mvt_log_density(x, p.dof, p.mu, p.sigma);
        double prev_gap = std::numeric_limits<double>::infinity();
        for (const double b : {1e-2, 1e-3, 1e-4, 1e-5}) {
            StParams q = p;
            q.beta = Vector::Constant(3, b);
            const double gap = std::abs(st_log_density(x, q) - t_ref);
            CHECK(gap < prev_gap + 1e-14);
            prev_gap = gap;
        }
        CHECK(prev_gap < 1e-4);
        // Below the degeneracy threshold the classical branch takes over exactly.
        StParams tiny = p;
        tiny.beta = Vector::Constant(3, 1e-8);
        CHECK(st_log_density(x, tiny) == doctest::Approx(t_ref).epsilon(1e-8));
    }
    StParams z = p;
    z.beta = Vector::Zero(3);
    const Vector x = random_vec(3, rng, 2.0);
    CHECK(st_log_density(x, z) == mvt_log_density(x, z.dof, z.mu, z.sigma));
}

TEST_CASE("skew-t density equals quadrature over the scale-mixture representation") {
    StParams p;
    p.dof = 5.0;
    p.mu = Vector::Zero(2);
    p.sigma = Matrix::Identity(2, 2);
    p.sigma(0, 1) = p.sigma(1, 0) = 0.3;
    p.beta = Vector::Ones(2);
    const Eigen::LLT<Matrix> llt(p.sigma);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double a0 = 0.5 * p.dof, b0 = 0.5 * p.dof;
    for (const double x1 : {-0.5, 1.2}) {
        Vector x(2);
        x << x1, 0.4;
        auto integrand = [&](double u) {
            const double w = std::exp(u);
            const Vector diff = x - p.mu - w * p.beta;
            const double maha = llt.matrixL().solve(diff).squaredNorm() / w;
            const double log_norm =
                -0.5 * (maha + 2.0 * std::log(2.0 * M_PI * w) + logdet);
            const double log_ig = a0 * std::log(b0) - std::lgamma(a0) - (a0 + 1.0) * u - b0 / w;
            return std::exp(log_norm + log_ig + u);  // + u from dw = w du
        };
        const double ref = oracle::integrate(integrand, -14.0, 10.0, 1e-12, 52);
        CHECK(std::exp(st_log_density(x, p)) == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("skew-t arises from the gh law as psi -> 0") {
    std::mt19937_64 rng(67);
    StParams st;
    st.dof = 7.0;
    st.mu = random_vec(2, rng, 1.0);
    st.sigma = random_spd(2, rng);
    st.beta = random_vec(2, rng, 1.0);
    for (int i = 0; i < 20; ++i) {
        const Vector x = random_vec(2, rng, 3.0);
        double prev_gap = std::numeric_limits<double>::infinity();
        for (int k = 2; k <= 8; ++k) {
            GhFullParams gh{-0.5 * st.dof, st.dof, std::pow(10.0, -k), st.mu, st.sigma, st.beta};
            const double gap = std::abs(st_log_density(x, st) - gh_full_log_density(x, gh));
            CHECK(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        CHECK(prev_gap < 1e-5);
    }
}

TEST_CASE("mean and covariance against the sampler") {
    GhdParams p;
    p.lambda = -0.5;
    p.omega = 6.0;
    p.mu = Vector::Zero(2);
    p.mu << 1.0, -3.0;
    p.sigma = Matrix::Identity(2, 2);
    p.beta = Vector::Ones(2);
    const auto mc = ghd_mean_cov(p);

    const GigParams mix{p.lambda, p.omega, p.omega};
    const double ew = gig_moment(1.0, mix);
    const double vw = gig_moment(2.0, mix) - ew * ew;
    CHECK(mc.mean.isApprox(p.mu + ew * p.beta, 1e-12));
    CHECK(mc.cov.isApprox(ew * p.sigma + vw * p.beta * p.beta.transpose(), 1e-12));

    const int n = 100000;
    const Matrix draws = sample_ghd(p, n, 99);
    const Vector mean_hat = draws.colwise().mean();
    for (int j = 0; j < 2; ++j) {
        const double se = std::sqrt(mc.cov(j, j) / n);
        CHECK(std::abs(mean_hat[j] - mc.mean[j]) < 4.0 * se);
    }
    const Matrix centered = draws.rowwise() - mean_hat.transpose();
    const Matrix cov_hat = centered.transpose() * centered / (n - 1.0);
    CHECK(cov_hat(0, 1) == doctest::Approx(mc.cov(0, 1)).epsilon(0.05));

    // beta = 0: mean is mu and margins are symmetric
    GhdParams q = p;
    q.beta = Vector::Zero(2);
    CHECK(ghd_mean_cov(q).mean.isApprox(q.mu, 1e-12));
    const Matrix sym = sample_ghd(q, n, 5);
    for (int j = 0; j < 2; ++j) {
        double m3 = 0.0;
        const double mj = sym.col(j).mean();
        const double sj = std::sqrt((sym.col(j).array() - mj).square().mean());
        for (int i = 0; i < n; ++i) m3 += std::pow((sym(i, j) - mj) / sj, 3.0);
        CHECK(std::abs(m3 / n) < 6.0 * std::sqrt(15.0 / n));
    }
}

TEST_CASE("sample_st covariance at weak skew and high dof") {
    StParams p;
    p.dof = 50.0;
    p.mu = Vector::Zero(2);
    p.sigma = Matrix::Identity(2, 2);
    p.beta = Vector::Zero(2);
    const int n = 100000;
    const Matrix draws = sample_st(p, n, 31);
    const Vector mean_hat = draws.colwise().mean();
    const Matrix centered = draws.rowwise() - mean_hat.transpose();
    const Matrix cov_hat = centered.transpose() * centered / (n - 1.0);
    const double target = p.dof / (p.dof - 2.0);
    CHECK(cov_hat(0, 0) == doctest::Approx(target).epsilon(0.05));
    CHECK(cov_hat(1, 1) == doctest::Approx(target).epsilon(0.05));
}

TEST_CASE("samplers are deterministic under seed") {
    GhdParams p;
    p.lambda = 1.0;
    p.omega = 6.0;
    p.mu = Vector::Zero(2);
    p.sigma = Matrix::Identity(2, 2);
    p.beta = Vector::Ones(2);
    CHECK(sample_ghd(p, 50, 12345) == sample_ghd(p, 50, 12345));
    StParams q{7.0, p.mu, p.sigma, p.beta};
    CHECK(sample_st(q, 50, 12345) == sample_st(q, 50, 12345));
}

TEST_CASE("affine transform: identity, selector, and change of variables") {
    std::mt19937_64 rng(71);
    GhdParams p;
    p.lambda = -0.4;
    p.omega = 3.0;
    p.mu = random_vec(3, rng, 1.0);
    p.sigma = random_spd(3, rng);
    p.beta = random_vec(3, rng, 0.7);

    const GhdParams ident = affine(p, Matrix::Identity(3, 3), Vector::Zero(3));
    CHECK(ident.mu.isApprox(p.mu));
    CHECK(ident.sigma.isApprox(p.sigma));
    CHECK(ident.beta.isApprox(p.beta));

    // row-selector B equals marginal
    Matrix B = Matrix::Zero(2, 3);
    B(0, 0) = 1.0;
    B(1, 2) = 1.0;
    const GhdParams sel = affine(p, B, Vector::Zero(2));
    const GhdParams marg = marginal(p, {0, 2});
    CHECK(sel.mu.isApprox(marg.mu));
    CHECK(sel.sigma.isApprox(marg.sigma));
    CHECK(sel.beta.isApprox(marg.beta));

    // invertible B: change of variables f_Y(y) = f_X(B^{-1}(y-b)) / |det B|
    Matrix A = random_spd(3, rng);
    A(0, 1) += 0.4;  // break symmetry; still invertible
    const Vector b = random_vec(3, rng, 1.0);
    const GhdParams py = affine(p, A, b);
    for (int i = 0; i < 20; ++i) {
        const Vector y = random_vec(3, rng, 2.0);
        const Vector x = A.partialPivLu().solve(y - b);
        const double expect = ghd_log_density(x, p) - std::log(std::abs(A.determinant()));
        CHECK(ghd_log_density(y, py) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("marginal: identity, composition, and 1-D quadrature agreement") {
    std::mt19937_64 rng(73);
    GhdParams p;
    p.lambda = -0.5;
    p.omega = 4.0;
    p.mu = random_vec(2, rng, 0.5);
    p.sigma = random_spd(2, rng);
    p.beta = random_vec(2, rng, 0.8);

    const GhdParams full = marginal(p, {0, 1});
    CHECK(full.mu.isApprox(p.mu));

    // integrate the joint over x2 and compare to the 1-D marginal density
    const GhdParams m1 = marginal(p, {0});
    for (const double x1 : {-1.0, 0.3, 2.0}) {
        auto f = [&](double x2) {
            Vector v(2);
            v << x1, x2;
            const double lf = ghd_log_density(v, p);
            return lf > -745.0 ? std::exp(lf) : 0.0;
        };
        const double joint_int = oracle::integrate(f, -45.0, 55.0, 1e-11, 50);
        Vector v1(1);
        v1 << x1;
        CHECK(joint_int == doctest::Approx(std::exp(ghd_log_density(v1, m1))).epsilon(1e-5));
    }

    // marginal of marginal equals marginal of composed indices
    std::mt19937_64 rng4(79);
    GhdParams q;
    q.lambda = 0.6;
    q.omega = 2.0;
    q.mu = random_vec(4, rng4, 1.0);
    q.sigma = random_spd(4, rng4);
    q.beta = random_vec(4, rng4, 1.0);
    const GhdParams two_step = marginal(marginal(q, {0, 1, 3}), {0, 2});
    const GhdParams one_step = marginal(q, {0, 3});
    CHECK(two_step.mu.isApprox(one_step.mu));
    CHECK(two_step.sigma.isApprox(one_step.sigma));
    CHECK(two_step.beta.isApprox(one_step.beta));

    CHECK_THROWS_AS(marginal(q, {}), std::invalid_argument);
    CHECK_THROWS_AS(marginal(q, {7}), std::invalid_argument);
}

TEST_CASE("conditional: block-diagonal shortcut and gaussian-style location") {
    std::mt19937_64 rng(83);
    GhdParams p;
    p.lambda = -0.7;
    p.omega = 5.0;
    p.mu = random_vec(4, rng, 1.0);
    p.sigma = Matrix::Zero(4, 4);
    p.sigma.topLeftCorner(2, 2) = random_spd(2, rng);
    p.sigma.bottomRightCorner(2, 2) = random_spd(2, rng);
    p.beta = random_vec(4, rng, 1.0);

    const Vector x1 = random_vec(2, rng, 1.0);
    const GhFullParams cond = conditional(p, {0, 1}, x1);
    CHECK(cond.mu.isApprox(p.mu.tail(2), 1e-12));
    CHECK(cond.sigma.isApprox(p.sigma.bottomRightCorner(2, 2), 1e-12));
    CHECK(cond.beta.isApprox(p.beta.tail(2), 1e-12));
    CHECK(cond.lambda == doctest::Approx(p.lambda - 1.0));
}

TEST_CASE("master closure: joint log-density = marginal + conditional") {
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int p_dim = 4, d1 = 2;
        const Matrix sigma = random_spd(p_dim, rng);
        const Vector mu = random_vec(p_dim, rng, 1.5);
        Vector beta = random_vec(p_dim, rng, 1.2);
        if (trial % 5 == 0) beta.setZero();
        const Vector x = random_vec(p_dim, rng, 2.5);
        const Vector x1 = x.head(d1), x2 = x.tail(p_dim - d1);
        const std::vector<int> idx1{0, 1}, idx2{2, 3};

        if (trial % 2 == 0) {
            GhdParams gp;
            gp.lambda = 6.0 * (unif(rng) - 0.5);
            gp.omega = 0.5 + 8.0 * unif(rng);
            gp.mu = mu;
            gp.sigma = sigma;
            gp.beta = beta;
            const double joint = ghd_log_density(x, gp);
            const double marg = ghd_log_density(x1, marginal(gp, idx1));
            const double cond = gh_full_log_density(x2, conditional(gp, idx1, x1));
            CHECK(std::abs(joint - (marg + cond)) < 1e-10);
        } else {
            StParams sp;
            sp.dof = 3.0 + 25.0 * unif(rng);
            sp.mu = mu;
            sp.sigma = sigma;
            sp.beta = beta;
            const double joint = st_log_density(x, sp);
            const double marg = st_log_density(x1, marginal(sp, idx1));
            const double cond = gh_full_log_density(x2, conditional(sp, idx1, x1));
            CHECK(std::abs(joint - (marg + cond)) < 1e-10);
        }
    }
}

TEST_SUITE_END();
