#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperclust/linalg.hpp"

namespace hyperclust {

// n x p data with an explicit missingness mask (true = missing). Masked
// cells hold NaN as a sentinel; arithmetic must consult the mask, never the
// sentinel value.
struct MaskedDataset {
    Matrix data;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
    std::vector<std::string> column_names;

    int rows() const { return static_cast<int>(data.rows()); }
    int cols() const { return static_cast<int>(data.cols()); }
    bool any_missing() const { return mask.any(); }
};

MaskedDataset make_masked(const Matrix& data,
                          const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                          std::vector<std::string> column_names = {});

// Fully-observed convenience wrapper.
MaskedDataset make_complete(const Matrix& data, std::vector<std::string> column_names = {});

void validate(const MaskedDataset& ds);

struct MissingPatternGroup {
    std::vector<bool> pattern;  // length p, true = missing
    std::vector<int> row_indices;
};

// Unique missing patterns in lexicographic order; groups partition the rows.
std::vector<MissingPatternGroup> extract_patterns(const MaskedDataset& ds);

// Component parameters split along a missing pattern, with the observed
// block's Cholesky cached.
struct PartitionedComponent {
    std::vector<int> obs_idx;
    std::vector<int> mis_idx;
    Vector mu_o, mu_m;
    Vector beta_o, beta_m;
    Matrix sigma_oo, sigma_om, sigma_mm;  // sigma_om is |o| x |m|
    Eigen::LLT<Matrix> sigma_oo_chol;
    bool ridged = false;

    int n_obs() const { return static_cast<int>(obs_idx.size()); }
    int n_mis() const { return static_cast<int>(mis_idx.size()); }
};

PartitionedComponent partition_component(const Vector& mu, const Vector& beta,
                                         const Matrix& sigma, const std::vector<bool>& pattern);

// Posterior law of the latent scale W given the observed block. psi may be
// exactly zero (skew-t component with vanishing observed skew), in which
// case the law degenerates to an inverse gamma and the moment accessors
// switch to the gamma-type formulas.
struct LatentWPosterior {
    double lambda = 0.0;
    double chi = 1.0;
    double psi = 1.0;  // >= 0
};

double latent_w_mean(const LatentWPosterior& w);      // E[W | ...]
double latent_w_inv_mean(const LatentWPosterior& w);  // E[1/W | ...]
double latent_w_log_mean(const LatentWPosterior& w);  // E[log W | ...]

LatentWPosterior latent_w_posterior_ghd(const Vector& x_o, const PartitionedComponent& pc,
                                        double lambda, double omega);
LatentWPosterior latent_w_posterior_st(const Vector& x_o, const PartitionedComponent& pc,
                                       double dof);

// Conditional moments of the missing block given the observed block and the
// component: E[X^m], E[(1/W) X^m], E[(1/W) X^m X^m'].
struct MissingBlockMoments {
    Vector xhat_m;
    Vector xtilde_m;
    Matrix xtt_m;
};

MissingBlockMoments conditional_missing_moments(const Vector& x_o, const PartitionedComponent& pc,
                                                double a, double b);

enum class MissingMechanism { Mcar, MarPattern1, MarPattern2 };

// Synthetic missingness. MCAR removes floor(n*rate) cells per column
// uniformly; the MAR patterns sort on column 1 (descending), split the rows
// into four blocks, and delete block-dependent counts from each remaining
// column. Every row keeps at least one observed cell.
MaskedDataset inject_missingness(const Matrix& data, MissingMechanism mechanism, double rate,
                                 std::uint64_t seed);

// Column-mean imputation over observed cells.
Matrix mean_impute(const MaskedDataset& ds);

}  // namespace hyperclust
