#include "hyperclust/missing_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hyperclust/special_math.hpp"

namespace hyperclust {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

MaskedDataset make_masked(const Matrix& data,
                          const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                          std::vector<std::string> column_names) {
    if (data.rows() != mask.rows() || data.cols() != mask.cols()) {
        throw std::invalid_argument("make_masked: data and mask shapes differ");
    }
    MaskedDataset ds;
    ds.data = data;
    ds.mask = mask;
    for (int i = 0; i < ds.rows(); ++i) {
        for (int j = 0; j < ds.cols(); ++j) {
            if (ds.mask(i, j)) ds.data(i, j) = kNaN;
        }
    }
    if (column_names.empty()) {
        for (int j = 0; j < ds.cols(); ++j) column_names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<int>(column_names.size()) != ds.cols()) {
        throw std::invalid_argument("make_masked: wrong number of column names");
    }
    ds.column_names = std::move(column_names);
    validate(ds);
    return ds;
}

MaskedDataset make_complete(const Matrix& data, std::vector<std::string> column_names) {
    return make_masked(data,
                       Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                           data.rows(), data.cols(), false),
                       std::move(column_names));
}

void validate(const MaskedDataset& ds) {
    for (int i = 0; i < ds.rows(); ++i) {
        bool any_obs = false;
        for (int j = 0; j < ds.cols(); ++j) {
            if (!ds.mask(i, j)) {
                any_obs = true;
                if (!std::isfinite(ds.data(i, j))) {
                    throw std::invalid_argument("MaskedDataset: non-finite observed cell at row " +
                                                std::to_string(i + 1) + ", column " +
                                                std::to_string(j + 1));
                }
            }
        }
        if (!any_obs) {
            throw std::invalid_argument("MaskedDataset: row " + std::to_string(i + 1) +
                                        " has no observed entries");
        }
    }
}

std::vector<MissingPatternGroup> extract_patterns(const MaskedDataset& ds) {
    validate(ds);
    std::vector<MissingPatternGroup> groups;
    std::map<std::vector<bool>, int> index;
    for (int i = 0; i < ds.rows(); ++i) {
        std::vector<bool> pat(ds.cols());
        for (int j = 0; j < ds.cols(); ++j) pat[j] = ds.mask(i, j);
        auto it = index.find(pat);
        if (it == index.end()) {
            index.emplace(pat, static_cast<int>(groups.size()));
            groups.push_back({pat, {i}});
        } else {
            groups[it->second].row_indices.push_back(i);
        }
    }
    std::sort(groups.begin(), groups.end(),
              [](const MissingPatternGroup& a, const MissingPatternGroup& b) {
                  return a.pattern < b.pattern;
              });
    return groups;
}

PartitionedComponent partition_component(const Vector& mu, const Vector& beta,
                                         const Matrix& sigma, const std::vector<bool>& pattern) {
    const int p = static_cast<int>(mu.size());
    if (static_cast<int>(pattern.size()) != p || beta.size() != p || sigma.rows() != p ||
        sigma.cols() != p) {
        throw std::invalid_argument("partition_component: inconsistent dimensions");
    }
    PartitionedComponent pc;
    for (int j = 0; j < p; ++j) (pattern[j] ? pc.mis_idx : pc.obs_idx).push_back(j);
    if (pc.obs_idx.empty()) {
        throw std::invalid_argument("partition_component: pattern has no observed coordinates");
    }
    const int no = pc.n_obs(), nm = pc.n_mis();
    pc.mu_o.resize(no);
    pc.beta_o.resize(no);
    pc.mu_m.resize(nm);
    pc.beta_m.resize(nm);
    pc.sigma_oo.resize(no, no);
    pc.sigma_om.resize(no, nm);
    pc.sigma_mm.resize(nm, nm);
    for (int a = 0; a < no; ++a) {
        pc.mu_o[a] = mu[pc.obs_idx[a]];
        pc.beta_o[a] = beta[pc.obs_idx[a]];
        for (int b = 0; b < no; ++b) pc.sigma_oo(a, b) = sigma(pc.obs_idx[a], pc.obs_idx[b]);
        for (int b = 0; b < nm; ++b) pc.sigma_om(a, b) = sigma(pc.obs_idx[a], pc.mis_idx[b]);
    }
    for (int a = 0; a < nm; ++a) {
        pc.mu_m[a] = mu[pc.mis_idx[a]];
        pc.beta_m[a] = beta[pc.mis_idx[a]];
        for (int b = 0; b < nm; ++b) pc.sigma_mm(a, b) = sigma(pc.mis_idx[a], pc.mis_idx[b]);
    }
    pc.sigma_oo_chol = safe_llt(pc.sigma_oo, &pc.ridged);
    return pc;
}

double latent_w_mean(const LatentWPosterior& w) {
    if (w.psi > 0.0) {
        const double z = std::sqrt(w.psi * w.chi);
        return std::sqrt(w.chi / w.psi) * bessel_k_ratio(w.lambda, z);
    }
    const double a0 = -w.lambda, b0 = 0.5 * w.chi;
    if (a0 <= 1.0) {
        throw std::domain_error("latent_w_mean: inverse-gamma posterior needs -lambda > 1");
    }
    return b0 / (a0 - 1.0);
}

double latent_w_inv_mean(const LatentWPosterior& w) {
    if (w.psi > 0.0) {
        // paper form: K-ratio plus the -2 lambda / chi correction
        const double z = std::sqrt(w.psi * w.chi);
        const double val =
            std::sqrt(w.psi / w.chi) * bessel_k_ratio(w.lambda, z) - 2.0 * w.lambda / w.chi;
        if (val > 0.0 && std::isfinite(val)) return val;
        // cancellation fallback: direct moment via K_{lambda-1}
        return std::sqrt(w.psi / w.chi) / bessel_k_ratio(w.lambda - 1.0, z);
    }
    const double a0 = -w.lambda, b0 = 0.5 * w.chi;
    return a0 / b0;
}

double latent_w_log_mean(const LatentWPosterior& w) {
    if (w.psi > 0.0) {
        const double z = std::sqrt(w.psi * w.chi);
        return 0.5 * (std::log(w.chi) - std::log(w.psi)) + dlog_bessel_k_dorder(w.lambda, z);
    }
    const double a0 = -w.lambda, b0 = 0.5 * w.chi;
    return std::log(b0) - digamma(a0);
}

LatentWPosterior latent_w_posterior_ghd(const Vector& x_o, const PartitionedComponent& pc,
                                        double lambda, double omega) {
    if (x_o.size() != pc.n_obs()) {
        throw std::invalid_argument("latent_w_posterior_ghd: observed length mismatch");
    }
    const double delta = mahalanobis_sq(pc.sigma_oo_chol, x_o - pc.mu_o);
    const double skew = pc.beta_o.dot(pc.sigma_oo_chol.solve(pc.beta_o));
    return {lambda - 0.5 * pc.n_obs(), omega + delta, omega + skew};
}

LatentWPosterior latent_w_posterior_st(const Vector& x_o, const PartitionedComponent& pc,
                                       double dof) {
    if (x_o.size() != pc.n_obs()) {
        throw std::invalid_argument("latent_w_posterior_st: observed length mismatch");
    }
    const double delta = mahalanobis_sq(pc.sigma_oo_chol, x_o - pc.mu_o);
    double skew = pc.beta_o.dot(pc.sigma_oo_chol.solve(pc.beta_o));
    if (skew <= 1e-12) skew = 0.0;  // gamma-type boundary
    return {-0.5 * (dof + pc.n_obs()), dof + delta, skew};
}

MissingBlockMoments conditional_missing_moments(const Vector& x_o, const PartitionedComponent& pc,
                                                double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("conditional_missing_moments: a and b must be positive");
    }
    const Vector obs_solve = pc.sigma_oo_chol.solve(x_o - pc.mu_o);
    const Vector mu_mo = pc.mu_m + pc.sigma_om.transpose() * obs_solve;
    const Vector beta_mo = pc.beta_m - pc.sigma_om.transpose() * pc.sigma_oo_chol.solve(pc.beta_o);
    Matrix sigma_mo = pc.sigma_mm - pc.sigma_om.transpose() * pc.sigma_oo_chol.solve(pc.sigma_om);
    sigma_mo = 0.5 * (sigma_mo + sigma_mo.transpose());

    MissingBlockMoments m;
    m.xhat_m = mu_mo + a * beta_mo;
    m.xtilde_m = b * mu_mo + beta_mo;
    m.xtt_m = sigma_mo + b * mu_mo * mu_mo.transpose() + mu_mo * beta_mo.transpose() +
              beta_mo * mu_mo.transpose() + a * beta_mo * beta_mo.transpose();
    m.xtt_m = 0.5 * (m.xtt_m + m.xtt_m.transpose());
    return m;
}

namespace {

// Restore the per-row constraint after MCAR masking while keeping the
// per-column counts exact: move one masked cell from an orphaned row to a
// row that can spare an observed cell in the same column.
void repair_orphan_rows(Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                        std::mt19937_64& rng) {
    const int n = static_cast<int>(mask.rows()), p = static_cast<int>(mask.cols());
    std::vector<int> obs_count(n, 0);
    for (int i = 0; i < n; ++i) obs_count[i] = p - static_cast<int>(mask.row(i).count());
    long guard = static_cast<long>(n) * p + 16;
    for (int i = 0; i < n; ++i) {
        while (obs_count[i] == 0) {
            if (--guard < 0) {
                throw std::runtime_error("inject_missingness: could not satisfy row constraint");
            }
            std::vector<int> cols;
            for (int j = 0; j < p; ++j) {
                if (mask(i, j)) cols.push_back(j);
            }
            std::uniform_int_distribution<int> pick_col(0, static_cast<int>(cols.size()) - 1);
            const int j = cols[pick_col(rng)];
            std::vector<int> donors;
            for (int r = 0; r < n; ++r) {
                if (r != i && !mask(r, j) && obs_count[r] >= 2) donors.push_back(r);
            }
            if (donors.empty()) continue;
            std::uniform_int_distribution<int> pick_row(0, static_cast<int>(donors.size()) - 1);
            const int r = donors[pick_row(rng)];
            mask(i, j) = false;
            mask(r, j) = true;
            ++obs_count[i];
            --obs_count[r];
        }
    }
}

std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

MaskedDataset inject_missingness(const Matrix& data, MissingMechanism mechanism, double rate,
                                 std::uint64_t seed) {
    const int n = static_cast<int>(data.rows()), p = static_cast<int>(data.cols());
    if (n < 1 || p < 1) throw std::invalid_argument("inject_missingness: empty data");
    if (!(rate >= 0.0) || !(rate < 1.0)) {
        throw std::invalid_argument("inject_missingness: rate must lie in [0, 1)");
    }
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(n, p);
    mask.setConstant(false);
    std::mt19937_64 rng(seed);

    if (rate == 0.0) return make_masked(data, mask);

    if (mechanism == MissingMechanism::Mcar) {
        const int per_col = static_cast<int>(std::floor(n * rate));
        if (per_col >= n) throw std::runtime_error("inject_missingness: rate removes whole column");
        for (int j = 0; j < p; ++j) {
            for (int i : sample_without_replacement(n, per_col, rng)) mask(i, j) = true;
        }
        repair_orphan_rows(mask, rng);
        return make_masked(data, mask);
    }

    if (p < 2) {
        throw std::runtime_error("inject_missingness: MAR patterns need at least two columns");
    }
    // Block weights normalized from the published per-block removal counts.
    const double w1[4] = {0.50, 0.15, 0.30, 0.05};
    const double w2[4] = {0.05, 0.30, 0.15, 0.50};
    const double* w = (mechanism == MissingMechanism::MarPattern1) ? w1 : w2;

    // Sort rows on column 1 (descending), then cut into four equal blocks.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return data(a, 0) > data(b, 0); });
    const int base = n / 4, extra = n % 4;
    int cursor = 0;
    std::vector<std::vector<int>> blocks(4);
    for (int k = 0; k < 4; ++k) {
        const int len = base + (k < extra ? 1 : 0);
        blocks[k].assign(order.begin() + cursor, order.begin() + cursor + len);
        cursor += len;
    }
    for (int k = 0; k < 4; ++k) {
        const int remove = static_cast<int>(std::floor(n * rate * w[k]));
        if (remove > static_cast<int>(blocks[k].size())) {
            throw std::runtime_error("inject_missingness: MAR rate infeasible for block " +
                                     std::to_string(k + 1));
        }
        for (int j = 1; j < p; ++j) {
            const auto rows = sample_without_replacement(static_cast<int>(blocks[k].size()),
                                                         remove, rng);
            for (int r : rows) mask(blocks[k][r], j) = true;
        }
    }
    return make_masked(data, mask);
}

Matrix mean_impute(const MaskedDataset& ds) {
    validate(ds);
    Matrix out = ds.data;
    for (int j = 0; j < ds.cols(); ++j) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < ds.rows(); ++i) {
            if (!ds.mask(i, j)) {
                sum += ds.data(i, j);
                ++count;
            }
        }
        if (count == 0) {
            throw std::invalid_argument("mean_impute: column " + std::to_string(j + 1) +
                                        " has no observed values");
        }
        const double mean = sum / count;
        for (int i = 0; i < ds.rows(); ++i) {
            if (ds.mask(i, j)) out(i, j) = mean;
        }
    }
    return out;
}

}  // namespace hyperclust
