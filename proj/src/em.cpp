#include "hyperclust/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hyperclust/model_selection.hpp"
#include "hyperclust/special_math.hpp"

namespace hyperclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
constexpr double kSkewTol = 1e-12;
constexpr double kOmegaMin = 1e-4;
constexpr double kOmegaMax = 1e4;
constexpr double kDofMin = 2.001;
constexpr double kDofMax = 200.0;

double log_sum_exp(const Vector& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

// Per-(pattern, component) evaluation context: one Cholesky per pair, then
// O(p^2) work per row.
struct PatternCompCtx {
    PartitionedComponent pc;
    double skew_o = 0.0;       // beta_o' Sigma_oo^{-1} beta_o
    Vector sigma_inv_beta;     // Sigma_oo^{-1} beta_o
    double logdet_oo = 0.0;
    Matrix reg;                // Sigma_om' Sigma_oo^{-1}  (m x o)
    Vector beta_mo;
    Matrix sigma_mo;
};

PatternCompCtx make_ctx(const Component& comp, const std::vector<bool>& pattern) {
    PatternCompCtx ctx;
    ctx.pc = partition_component(comp.mu, comp.beta, comp.sigma, pattern);
    ctx.sigma_inv_beta = ctx.pc.sigma_oo_chol.solve(ctx.pc.beta_o);
    ctx.skew_o = ctx.pc.beta_o.dot(ctx.sigma_inv_beta);
    ctx.logdet_oo = log_det_from_llt(ctx.pc.sigma_oo_chol);
    if (ctx.pc.n_mis() > 0) {
        ctx.reg = ctx.pc.sigma_oo_chol.solve(ctx.pc.sigma_om).transpose();
        ctx.beta_mo = ctx.pc.beta_m - ctx.reg * ctx.pc.beta_o;
        ctx.sigma_mo = ctx.pc.sigma_mm - ctx.reg * ctx.pc.sigma_om;
        ctx.sigma_mo = 0.5 * (ctx.sigma_mo + ctx.sigma_mo.transpose());
    }
    return ctx;
}

// Marginal log-density of the observed block.
double marginal_log_density(const PatternCompCtx& ctx, const Component& comp, Family family,
                            double delta, double lin) {
    const int po = ctx.pc.n_obs();
    if (family == Family::Mghd) {
        const double half_order = comp.lambda - 0.5 * po;
        const double rate = comp.omega + ctx.skew_o;
        const double cd = comp.omega + delta;
        return 0.5 * half_order * (std::log(cd) - std::log(rate)) +
               log_bessel_k(half_order, std::sqrt(cd * rate)) - 0.5 * po * kLog2Pi -
               0.5 * ctx.logdet_oo - log_bessel_k(comp.lambda, comp.omega) + lin;
    }
    const double v = comp.dof;
    if (ctx.skew_o <= kSkewTol) {
        return std::lgamma(0.5 * (v + po)) - std::lgamma(0.5 * v) -
               0.5 * po * std::log(v * 3.14159265358979323846) - 0.5 * ctx.logdet_oo -
               0.5 * (v + po) * std::log1p(delta / v);
    }
    return -0.25 * (v + po) * (std::log(v + delta) - std::log(ctx.skew_o)) +
           0.5 * v * std::log(v) +
           log_bessel_k(-0.5 * (v + po), std::sqrt((v + delta) * ctx.skew_o)) -
           0.5 * po * kLog2Pi - 0.5 * ctx.logdet_oo - std::lgamma(0.5 * v) -
           (0.5 * v - 1.0) * std::log(2.0) + lin;
}

LatentWPosterior w_posterior(const PatternCompCtx& ctx, const Component& comp, Family family,
                             double delta) {
    const int po = ctx.pc.n_obs();
    if (family == Family::Mghd) {
        return {comp.lambda - 0.5 * po, comp.omega + delta, comp.omega + ctx.skew_o};
    }
    return {-0.5 * (comp.dof + po), comp.dof + delta,
            ctx.skew_o <= kSkewTol ? 0.0 : ctx.skew_o};
}

// Profile objective for the index/concentration update.
double q_latent(double lambda, double omega, double abar, double bbar, double cbar) {
    return -log_bessel_k(lambda, omega) + (lambda - 1.0) * cbar - 0.5 * omega * (abar + bbar);
}

}  // namespace

void validate(const MixtureModel& model) {
    if (model.components.empty() || model.weights.size() != model.components.size()) {
        throw std::invalid_argument("MixtureModel: weights and components must align");
    }
    double total = 0.0;
    for (double w : model.weights) {
        if (!(w > 0.0)) throw std::invalid_argument("MixtureModel: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12 * model.groups() + 1e-12) {
        throw std::invalid_argument("MixtureModel: weights must sum to one");
    }
    const int p = model.dim();
    for (const Component& c : model.components) {
        if (c.mu.size() != p) throw std::invalid_argument("MixtureModel: mixed dimensions");
        if (model.family == Family::Mghd) {
            validate(as_ghd(c));
        } else {
            validate(as_st(c));
        }
    }
}

GhdParams as_ghd(const Component& c) { return {c.lambda, c.omega, c.mu, c.sigma, c.beta}; }
StParams as_st(const Component& c) { return {c.dof, c.mu, c.sigma, c.beta}; }

double observed_log_likelihood(const MaskedDataset& ds, const MixtureModel& model) {
    validate(model);
    if (model.dim() != ds.cols()) {
        throw std::invalid_argument("observed_log_likelihood: dimension mismatch");
    }
    const int G = model.groups();
    const auto groups = extract_patterns(ds);
    double total = 0.0;
    for (const auto& group : groups) {
        std::vector<PatternCompCtx> ctx;
        ctx.reserve(G);
        for (int g = 0; g < G; ++g) ctx.push_back(make_ctx(model.components[g], group.pattern));
        Vector terms(G);
        for (int row : group.row_indices) {
            for (int g = 0; g < G; ++g) {
                Vector x_o(ctx[g].pc.n_obs());
                for (int a = 0; a < ctx[g].pc.n_obs(); ++a) {
                    x_o[a] = ds.data(row, ctx[g].pc.obs_idx[a]);
                }
                const Vector diff = x_o - ctx[g].pc.mu_o;
                const double delta = mahalanobis_sq(ctx[g].pc.sigma_oo_chol, diff);
                const double lin = diff.dot(ctx[g].sigma_inv_beta);
                terms[g] = std::log(model.weights[g]) +
                           marginal_log_density(ctx[g], model.components[g], model.family, delta,
                                                lin);
            }
            total += log_sum_exp(terms);
        }
    }
    return total;
}

EStepCache e_step(const MaskedDataset& ds, const MixtureModel& model) {
    validate(model);
    const int n = ds.rows(), G = model.groups();
    if (model.dim() != ds.cols()) throw std::invalid_argument("e_step: dimension mismatch");

    EStepCache cache;
    cache.resp.resize(n, G);
    cache.a.resize(n, G);
    cache.b.resize(n, G);
    cache.c.resize(n, G);
    cache.groups = extract_patterns(ds);
    cache.cond.resize(cache.groups.size());
    cache.group_of_row.assign(n, -1);
    cache.index_in_group.assign(n, -1);
    cache.loglik = 0.0;

    for (size_t gi = 0; gi < cache.groups.size(); ++gi) {
        const auto& group = cache.groups[gi];
        const int rows_here = static_cast<int>(group.row_indices.size());
        std::vector<PatternCompCtx> ctx;
        ctx.reserve(G);
        for (int g = 0; g < G; ++g) ctx.push_back(make_ctx(model.components[g], group.pattern));

        cache.cond[gi].resize(G);
        for (int g = 0; g < G; ++g) {
            cache.cond[gi][g].beta_mo = ctx[g].beta_mo;
            cache.cond[gi][g].sigma_mo = ctx[g].sigma_mo;
            cache.cond[gi][g].mu_mo.resize(rows_here);
        }

        Vector terms(G);
        for (int r = 0; r < rows_here; ++r) {
            const int row = group.row_indices[r];
            cache.group_of_row[row] = static_cast<int>(gi);
            cache.index_in_group[row] = r;
            for (int g = 0; g < G; ++g) {
                const auto& cx = ctx[g];
                Vector x_o(cx.pc.n_obs());
                for (int a = 0; a < cx.pc.n_obs(); ++a) x_o[a] = ds.data(row, cx.pc.obs_idx[a]);
                const Vector diff = x_o - cx.pc.mu_o;
                const double delta = mahalanobis_sq(cx.pc.sigma_oo_chol, diff);
                const double lin = diff.dot(cx.sigma_inv_beta);
                terms[g] = std::log(model.weights[g]) +
                           marginal_log_density(cx, model.components[g], model.family, delta, lin);
                const auto wp = w_posterior(cx, model.components[g], model.family, delta);
                cache.a(row, g) = latent_w_mean(wp);
                cache.b(row, g) = latent_w_inv_mean(wp);
                cache.c(row, g) = latent_w_log_mean(wp);
                if (cx.pc.n_mis() > 0) {
                    cache.cond[gi][g].mu_mo[r] = cx.pc.mu_m + cx.reg * diff;
                } else {
                    cache.cond[gi][g].mu_mo[r] = Vector();
                }
            }
            const double lse = log_sum_exp(terms);
            cache.loglik += lse;
            for (int g = 0; g < G; ++g) cache.resp(row, g) = std::exp(terms[g] - lse);
        }
    }
    return cache;
}

SufficientStats sufficient_stats(const MaskedDataset& ds, const EStepCache& cache) {
    const int n = static_cast<int>(cache.resp.rows());
    const int G = static_cast<int>(cache.resp.cols());
    const int p = ds.cols();
    SufficientStats st;
    st.n_g.assign(G, 0.0);
    st.abar.assign(G, 0.0);
    st.bbar.assign(G, 0.0);
    st.cbar.assign(G, 0.0);
    st.xbar_g.assign(G, Vector::Zero(p));
    for (int g = 0; g < G; ++g) {
        for (int i = 0; i < n; ++i) {
            const double z = cache.resp(i, g);
            st.n_g[g] += z;
            st.abar[g] += z * cache.a(i, g);
            st.bbar[g] += z * cache.b(i, g);
            st.cbar[g] += z * cache.c(i, g);
        }
        if (st.n_g[g] <= 0.0) throw DegenerateComponentError("empty component " +
                                                             std::to_string(g + 1));
        st.abar[g] /= st.n_g[g];
        st.bbar[g] /= st.n_g[g];
        st.cbar[g] /= st.n_g[g];
    }
    // stacked observed/imputed means
    for (size_t gi = 0; gi < cache.groups.size(); ++gi) {
        const auto& group = cache.groups[gi];
        std::vector<int> obs, mis;
        for (int j = 0; j < p; ++j) (group.pattern[j] ? mis : obs).push_back(j);
        for (size_t r = 0; r < group.row_indices.size(); ++r) {
            const int row = group.row_indices[r];
            for (int g = 0; g < G; ++g) {
                const double z = cache.resp(row, g);
                for (int a = 0; a < static_cast<int>(obs.size()); ++a) {
                    st.xbar_g[g][obs[a]] += z * ds.data(row, obs[a]);
                }
                if (!mis.empty()) {
                    const auto& cc = cache.cond[gi][g];
                    const Vector xhat = cc.mu_mo[r] + cache.a(row, g) * cc.beta_mo;
                    for (int a = 0; a < static_cast<int>(mis.size()); ++a) {
                        st.xbar_g[g][mis[a]] += z * xhat[a];
                    }
                }
            }
        }
    }
    for (int g = 0; g < G; ++g) st.xbar_g[g] /= st.n_g[g];
    return st;
}

void m_step_weights_location_skew(const MaskedDataset& ds, const EStepCache& cache,
                                  MixtureModel& model, bool fix_beta_zero) {
    const int n = ds.rows(), p = ds.cols(), G = model.groups();
    const SufficientStats st = sufficient_stats(ds, cache);

    for (int g = 0; g < G; ++g) model.weights[g] = st.n_g[g] / n;

    for (int g = 0; g < G; ++g) {
        Vector num_mu = Vector::Zero(p);
        Vector num_beta = Vector::Zero(p);
        double den = 0.0, den_b = 0.0;
        for (size_t gi = 0; gi < cache.groups.size(); ++gi) {
            const auto& group = cache.groups[gi];
            std::vector<int> obs, mis;
            for (int j = 0; j < p; ++j) (group.pattern[j] ? mis : obs).push_back(j);
            const auto& cc = cache.cond[gi][g];
            for (size_t r = 0; r < group.row_indices.size(); ++r) {
                const int row = group.row_indices[r];
                const double z = cache.resp(row, g);
                const double ai = cache.a(row, g), bi = cache.b(row, g);
                den += z * (st.abar[g] * bi - 1.0);
                den_b += z * bi;
                Vector xhat, xtilde;
                if (!mis.empty()) {
                    xhat = cc.mu_mo[r] + ai * cc.beta_mo;
                    xtilde = bi * cc.mu_mo[r] + cc.beta_mo;
                }
                if (fix_beta_zero) {
                    for (int a = 0; a < static_cast<int>(obs.size()); ++a) {
                        num_mu[obs[a]] += z * bi * ds.data(row, obs[a]);
                    }
                    for (int a = 0; a < static_cast<int>(mis.size()); ++a) {
                        num_mu[mis[a]] += z * xtilde[a];
                    }
                } else {
                    for (int a = 0; a < static_cast<int>(obs.size()); ++a) {
                        const double x = ds.data(row, obs[a]);
                        num_mu[obs[a]] += z * (st.abar[g] * bi - 1.0) * x;
                        num_beta[obs[a]] += z * (st.bbar[g] - bi) * x;
                    }
                    for (int a = 0; a < static_cast<int>(mis.size()); ++a) {
                        num_mu[mis[a]] += z * (st.abar[g] * xtilde[a] - xhat[a]);
                        num_beta[mis[a]] += z * (st.bbar[g] * xhat[a] - xtilde[a]);
                    }
                }
            }
        }
        if (fix_beta_zero) {
            model.components[g].mu = num_mu / den_b;
            model.components[g].beta = Vector::Zero(p);
        } else {
            if (std::abs(den) < 1e-12) {
                throw DegenerateComponentError("location/skew denominator vanished in component " +
                                               std::to_string(g + 1));
            }
            model.components[g].mu = num_mu / den;
            model.components[g].beta = num_beta / den;
        }
    }
}

void m_step_scale(const MaskedDataset& ds, const EStepCache& cache, MixtureModel& model,
                  int* ridge_events) {
    const int p = ds.cols(), G = model.groups();
    const SufficientStats st = sufficient_stats(ds, cache);

    ScatterSet sc;
    sc.weights = st.n_g;
    sc.scatters.assign(G, Matrix::Zero(p, p));
    for (int g = 0; g < G; ++g) {
        if (st.n_g[g] < p + 1) {
            throw DegenerateComponentError("component " + std::to_string(g + 1) +
                                           " carries fewer than p+1 observations");
        }
        const Vector& mu = model.components[g].mu;
        const Vector& beta = model.components[g].beta;
        Matrix acc = Matrix::Zero(p, p);
        for (size_t gi = 0; gi < cache.groups.size(); ++gi) {
            const auto& group = cache.groups[gi];
            std::vector<int> obs, mis;
            for (int j = 0; j < p; ++j) (group.pattern[j] ? mis : obs).push_back(j);
            const int no = static_cast<int>(obs.size()), nm = static_cast<int>(mis.size());
            Vector mu_o(no), mu_m(nm);
            for (int a = 0; a < no; ++a) mu_o[a] = mu[obs[a]];
            for (int a = 0; a < nm; ++a) mu_m[a] = mu[mis[a]];
            const auto& cc = cache.cond[gi][g];
            for (size_t r = 0; r < group.row_indices.size(); ++r) {
                const int row = group.row_indices[r];
                const double z = cache.resp(row, g);
                const double ai = cache.a(row, g), bi = cache.b(row, g);
                Vector x_o(no);
                for (int a = 0; a < no; ++a) x_o[a] = ds.data(row, obs[a]);
                const Vector d_o = x_o - mu_o;
                // observed block
                for (int a = 0; a < no; ++a) {
                    for (int b2 = 0; b2 < no; ++b2) {
                        acc(obs[a], obs[b2]) += z * bi * d_o[a] * d_o[b2];
                    }
                }
                if (nm > 0) {
                    const Vector xtilde = bi * cc.mu_mo[r] + cc.beta_mo;
                    const Vector cross = xtilde - bi * mu_m;
                    for (int a = 0; a < no; ++a) {
                        for (int b2 = 0; b2 < nm; ++b2) {
                            const double val = z * d_o[a] * cross[b2];
                            acc(obs[a], mis[b2]) += val;
                            acc(mis[b2], obs[a]) += val;
                        }
                    }
                    const Matrix xtt = cc.sigma_mo + bi * cc.mu_mo[r] * cc.mu_mo[r].transpose() +
                                       cc.mu_mo[r] * cc.beta_mo.transpose() +
                                       cc.beta_mo * cc.mu_mo[r].transpose() +
                                       ai * cc.beta_mo * cc.beta_mo.transpose();
                    const Matrix k_m = xtt - xtilde * mu_m.transpose() - mu_m * xtilde.transpose() +
                                       bi * mu_m * mu_m.transpose();
                    for (int a = 0; a < nm; ++a) {
                        for (int b2 = 0; b2 < nm; ++b2) {
                            acc(mis[a], mis[b2]) += z * k_m(a, b2);
                        }
                    }
                }
            }
        }
        Matrix sigma_hat = acc / st.n_g[g];
        const Vector shift = st.xbar_g[g] - mu;
        sigma_hat -= shift * beta.transpose() + beta * shift.transpose();
        sigma_hat += st.abar[g] * beta * beta.transpose();
        sc.scatters[g] = 0.5 * st.n_g[g] * (sigma_hat + sigma_hat.transpose());
    }

    std::vector<Matrix> warm(G);
    for (int g = 0; g < G; ++g) warm[g] = model.components[g].sigma;
    const auto res = constrain(sc, model.structure, &warm);
    for (int g = 0; g < G; ++g) {
        bool ridged = false;
        const auto llt = safe_llt(res.sigmas[g], &ridged);  // PD check + ridge policy
        if (ridged && ridge_events) ++(*ridge_events);
        Matrix fixed = res.sigmas[g];
        if (ridged) fixed.diagonal().array() += 1e-8 * res.sigmas[g].trace() / p;
        Eigen::LLT<Matrix> verify(fixed);
        if (verify.info() != Eigen::Success) {
            throw DegenerateComponentError("scale update lost positive definiteness in component " +
                                           std::to_string(g + 1));
        }
        model.components[g].sigma = fixed;
    }
}

int update_index_concentration(const EStepCache& cache, MixtureModel& model) {
    const int G = model.groups();
    int fallbacks = 0;
    const int n = static_cast<int>(cache.resp.rows());
    for (int g = 0; g < G; ++g) {
        double n_g = 0.0, abar = 0.0, bbar = 0.0, cbar = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = cache.resp(i, g);
            n_g += z;
            abar += z * cache.a(i, g);
            bbar += z * cache.b(i, g);
            cbar += z * cache.c(i, g);
        }
        abar /= n_g;
        bbar /= n_g;
        cbar /= n_g;

        Component& comp = model.components[g];
        const double q0 = q_latent(comp.lambda, comp.omega, abar, bbar, cbar);

        // index step: fixed-point candidate, halved toward the previous
        // value until the profile objective does not decrease
        double lambda_new = comp.lambda;
        const double dk = dlog_bessel_k_dorder(comp.lambda, comp.omega);
        if (std::abs(dk) >= 1e-12) {
            const double cand = cbar * comp.lambda / dk;
            if (std::isfinite(cand)) {
                double t = 1.0;
                for (int h = 0; h <= 20; ++h) {
                    const double trial = comp.lambda + t * (cand - comp.lambda);
                    if (q_latent(trial, comp.omega, abar, bbar, cbar) >= q0) {
                        lambda_new = trial;
                        break;
                    }
                    t *= 0.5;
                }
            }
        }
        const double q1 = q_latent(lambda_new, comp.omega, abar, bbar, cbar);

        // concentration: one safeguarded Newton step on the profile
        const double h = 1e-5 * std::max(1.0, comp.omega);
        const double qp = q_latent(lambda_new, comp.omega + h, abar, bbar, cbar);
        const double qm = q_latent(lambda_new, comp.omega - h, abar, bbar, cbar);
        const double d1 = (qp - qm) / (2.0 * h);
        const double d2 = (qp - 2.0 * q1 + qm) / (h * h);
        double omega_new = comp.omega;
        if (std::isfinite(d1) && std::isfinite(d2) && d2 < 0.0) {
            double step = -d1 / d2;
            for (int half = 0; half <= 20; ++half) {
                const double trial = std::clamp(comp.omega + step, kOmegaMin, kOmegaMax);
                if (q_latent(lambda_new, trial, abar, bbar, cbar) >= q1) {
                    omega_new = trial;
                    break;
                }
                step *= 0.5;
            }
        }
        if (omega_new == comp.omega && lambda_new == comp.lambda) ++fallbacks;
        comp.lambda = lambda_new;
        comp.omega = omega_new;
    }
    return fallbacks;
}

int update_dof(const EStepCache& cache, MixtureModel& model) {
    const int G = model.groups();
    const int n = static_cast<int>(cache.resp.rows());
    int clamped = 0;
    for (int g = 0; g < G; ++g) {
        double n_g = 0.0, cb = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = cache.resp(i, g);
            n_g += z;
            cb += z * (cache.c(i, g) + cache.b(i, g));
        }
        cb /= n_g;
        auto residual = [&](double v) {
            return std::log(0.5 * v) + 1.0 - digamma(0.5 * v) - cb;
        };
        double lo = kDofMin, hi = kDofMax;
        const double f_lo = residual(lo), f_hi = residual(hi);
        double v_new;
        if (f_lo <= 0.0) {
            v_new = lo;  // decreasing residual: no root above lo
            ++clamped;
        } else if (f_hi >= 0.0) {
            v_new = hi;
            ++clamped;
        } else {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f_mid = residual(mid);
                if (std::abs(f_mid) < 1e-12 || hi - lo < 1e-12) {
                    break;
                }
                if (f_mid > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            v_new = 0.5 * (lo + hi);
        }
        model.components[g].dof = v_new;
    }
    return clamped;
}

std::vector<int> kmeans_labels(const Matrix& data, int G, std::uint64_t seed) {
    const int n = static_cast<int>(data.rows());
    if (G < 1 || G > n) throw std::invalid_argument("kmeans_labels: need 1 <= G <= n");
    std::mt19937_64 rng(seed);

    // distinct random rows as initial centers
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < G; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    Matrix centers(G, data.cols());
    for (int g = 0; g < G; ++g) centers.row(g) = data.row(idx[g]);

    std::vector<int> labels(n, 0);
    for (int sweep = 0; sweep < 10; ++sweep) {
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int g = 0; g < G; ++g) {
                const double d = (data.row(i) - centers.row(g)).squaredNorm();
                if (d < best) {
                    best = d;
                    labels[i] = g;
                }
            }
        }
        Matrix sums = Matrix::Zero(G, data.cols());
        std::vector<int> counts(G, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[i]) += data.row(i);
            ++counts[labels[i]];
        }
        for (int g = 0; g < G; ++g) {
            if (counts[g] > 0) {
                centers.row(g) = sums.row(g) / counts[g];
            } else {
                // re-seed on the point farthest from its center
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = (data.row(i) - centers.row(labels[i])).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers.row(g) = data.row(far);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int g = 0; g < G; ++g) {
            const double d = (data.row(i) - centers.row(g)).squaredNorm();
            if (d < best) {
                best = d;
                labels[i] = g;
            }
        }
    }
    return labels;
}

MixtureModel initialize(const MaskedDataset& ds, int G, Family family,
                        CovarianceStructure structure, const FitConfig& cfg, std::uint64_t seed) {
    const int n = ds.rows(), p = ds.cols();
    if (G < 1) throw std::invalid_argument("initialize: G must be >= 1");
    if (G > n) throw std::invalid_argument("initialize: more components than observations");

    const Matrix imputed = mean_impute(ds);
    std::vector<int> labels;
    switch (cfg.init) {
        case FitConfig::Init::KMeans:
            labels = kmeans_labels(imputed, G, seed);
            break;
        case FitConfig::Init::Random: {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> pick(0, G - 1);
            labels.resize(n);
            for (int i = 0; i < n; ++i) labels[i] = pick(rng);
            break;
        }
        case FitConfig::Init::Labels:
            labels = cfg.init_labels;
            if (static_cast<int>(labels.size()) != n) {
                throw std::invalid_argument("initialize: provided labels have wrong length");
            }
            for (int v : labels) {
                if (v < 0 || v >= G) throw std::invalid_argument("initialize: label out of range");
            }
            break;
    }

    MixtureModel model;
    model.family = family;
    model.structure = structure;
    model.weights.assign(G, 0.0);
    model.components.resize(G);

    ScatterSet sc;
    sc.weights.assign(G, 0.0);
    sc.scatters.assign(G, Matrix::Zero(p, p));
    std::vector<Vector> means(G, Vector::Zero(p));
    std::vector<int> counts(G, 0);
    for (int i = 0; i < n; ++i) {
        means[labels[i]] += imputed.row(i).transpose();
        ++counts[labels[i]];
    }
    for (int g = 0; g < G; ++g) {
        if (counts[g] == 0) {
            // park the empty component on the overall mean
            means[g] = imputed.colwise().mean().transpose();
            counts[g] = 1;
        } else {
            means[g] /= counts[g];
        }
    }
    for (int i = 0; i < n; ++i) {
        const Vector d = imputed.row(i).transpose() - means[labels[i]];
        sc.scatters[labels[i]] += d * d.transpose();
    }
    const Matrix total_cov = [&] {
        const Vector m = imputed.colwise().mean().transpose();
        Matrix acc = Matrix::Zero(p, p);
        for (int i = 0; i < n; ++i) {
            const Vector d = imputed.row(i).transpose() - m;
            acc += d * d.transpose();
        }
        return Matrix((acc / n + 1e-6 * Matrix::Identity(p, p)).eval());
    }();
    for (int g = 0; g < G; ++g) {
        sc.weights[g] = counts[g];
        if (counts[g] <= p) sc.scatters[g] = counts[g] * total_cov;  // too small to estimate
        sc.scatters[g] = 0.5 * (sc.scatters[g] + sc.scatters[g].transpose());
        sc.scatters[g].diagonal().array() += 1e-8 * (1.0 + sc.scatters[g].trace() / p);
    }
    const auto constrained = constrain(sc, structure);

    for (int g = 0; g < G; ++g) {
        model.weights[g] = static_cast<double>(counts[g]) / n;
        Component& c = model.components[g];
        c.mu = means[g];
        c.sigma = constrained.sigmas[g];
        c.beta = Vector::Constant(p, cfg.fix_beta_zero ? 0.0 : 1e-3);
        c.lambda = -0.5;
        c.omega = 1.0;
        c.dof = 50.0;
    }
    // renormalize weights (empty-component parking may have perturbed counts)
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
    return model;
}

namespace {

struct RunResult {
    MixtureModel model;
    std::vector<double> trace;
    bool converged = false;
    int iterations = 0;
    int ridge_events = 0;
    int latent_fallbacks = 0;
    EStepCache cache;
    bool ok = false;
    std::string error;
};

RunResult run_once(const MaskedDataset& ds, int G, Family family, CovarianceStructure structure,
                   const FitConfig& cfg, std::uint64_t seed) {
    RunResult rr;
    try {
        MixtureModel model = initialize(ds, G, family, structure, cfg, seed);
        EStepCache cache = e_step(ds, model);
        rr.model = model;
        rr.cache = cache;
        rr.trace.push_back(cache.loglik);
        rr.ok = true;
        for (int iter = 1; iter <= cfg.max_iter; ++iter) {
            rr.iterations = iter;
            try {
                m_step_weights_location_skew(ds, cache, model, cfg.fix_beta_zero);
                m_step_scale(ds, cache, model, &rr.ridge_events);
                if (!cfg.fix_latent) {
                    if (family == Family::Mghd) {
                        rr.latent_fallbacks += update_index_concentration(cache, model);
                    } else {
                        update_dof(cache, model);
                    }
                }
            } catch (const DegenerateComponentError& err) {
                rr.error = err.what();
                rr.converged = false;
                // keep the last healthy iterate; a run that degenerates
                // before completing any sweep has produced nothing
                if (rr.trace.size() <= 1) rr.ok = false;
                return rr;
            }
            cache = e_step(ds, model);
            rr.model = model;
            rr.cache = cache;
            rr.trace.push_back(cache.loglik);
            const size_t k = rr.trace.size();
            if (k >= 3 && aitken_converged(rr.trace[k - 3], rr.trace[k - 2], rr.trace[k - 1],
                                           cfg.epsilon)) {
                rr.converged = true;
                break;
            }
        }
    } catch (const std::exception& err) {
        rr.ok = false;
        rr.error = err.what();
    }
    return rr;
}

}  // namespace

FitReport fit(const MaskedDataset& ds, int G, Family family, CovarianceStructure structure,
              const FitConfig& cfg) {
    validate(ds);
    if (cfg.max_iter < 1 || !(cfg.epsilon > 0.0) || cfg.n_starts < 1) {
        throw std::invalid_argument("fit: bad configuration");
    }
    RunResult best;
    bool have_best = false;
    std::string last_error = "no starts attempted";
    for (int s = 0; s < cfg.n_starts; ++s) {
        RunResult rr = run_once(ds, G, family, structure, cfg, cfg.seed + s);
        if (!rr.ok || rr.trace.empty()) {
            last_error = rr.error;
            continue;
        }
        if (!have_best || rr.trace.back() > best.trace.back()) {
            best = std::move(rr);
            have_best = true;
        }
    }
    if (!have_best) {
        throw FitError("fit: every start failed; last error: " + last_error);
    }

    FitReport report;
    report.model = best.model;
    report.loglik_trace = best.trace;
    report.loglik = best.trace.back();
    report.converged = best.converged;
    report.iterations = best.iterations;
    report.ridge_events = best.ridge_events;
    report.latent_update_fallbacks = best.latent_fallbacks;
    report.resp = best.cache.resp;

    const int rho = free_parameter_count(structure, ds.cols(), G, family);
    report.bic = bic(report.loglik, rho, ds.rows());
    report.icl = icl(report.bic, report.resp);

    // MAP labels and imputation from the final cache
    const int n = ds.rows();
    report.map_labels.resize(n);
    report.imputed = ds.data;
    for (int i = 0; i < n; ++i) {
        int arg = 0;
        double bestv = report.resp(i, 0);
        for (int g = 1; g < G; ++g) {
            if (report.resp(i, g) > bestv) {
                bestv = report.resp(i, g);
                arg = g;
            }
        }
        report.map_labels[i] = arg;
        const int gi = best.cache.group_of_row[i];
        const int r = best.cache.index_in_group[i];
        const auto& group = best.cache.groups[gi];
        const auto& cc = best.cache.cond[gi][arg];
        if (cc.mu_mo[r].size() > 0) {
            const Vector xhat = cc.mu_mo[r] + best.cache.a(i, arg) * cc.beta_mo;
            int a = 0;
            for (int j = 0; j < ds.cols(); ++j) {
                if (group.pattern[j]) report.imputed(i, j) = xhat[a++];
            }
        }
    }
    return report;
}

Prediction predict(const MixtureModel& model, const MaskedDataset& ds) {
    validate(ds);
    const EStepCache cache = e_step(ds, model);
    const int n = ds.rows(), G = model.groups();
    Prediction out;
    out.resp = cache.resp;
    out.labels.resize(n);
    out.imputed = ds.data;
    for (int i = 0; i < n; ++i) {
        int arg = 0;
        double bestv = cache.resp(i, 0);
        for (int g = 1; g < G; ++g) {
            if (cache.resp(i, g) > bestv) {
                bestv = cache.resp(i, g);
                arg = g;
            }
        }
        out.labels[i] = arg;
        const int gi = cache.group_of_row[i];
        const int r = cache.index_in_group[i];
        const auto& group = cache.groups[gi];
        const auto& cc = cache.cond[gi][arg];
        if (cc.mu_mo[r].size() > 0) {
            const Vector xhat = cc.mu_mo[r] + cache.a(i, arg) * cc.beta_mo;
            int a = 0;
            for (int j = 0; j < ds.cols(); ++j) {
                if (group.pattern[j]) out.imputed(i, j) = xhat[a++];
            }
        }
    }
    return out;
}

}  // namespace hyperclust
