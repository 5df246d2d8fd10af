#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperclust/distributions.hpp"
#include "hyperclust/gpcm.hpp"
#include "hyperclust/missing_data.hpp"

namespace hyperclust {

// One mixture component. The latent-scale parameters are family-dependent:
// (lambda, omega) drive the generalized hyperbolic family, dof the skew-t.
struct Component {
    double lambda = -0.5;
    double omega = 1.0;
    double dof = 50.0;
    Vector mu;
    Matrix sigma;
    Vector beta;
};

struct MixtureModel {
    Family family = Family::Mghd;
    CovarianceStructure structure = CovarianceStructure::VVV;
    std::vector<double> weights;
    std::vector<Component> components;

    int groups() const { return static_cast<int>(components.size()); }
    int dim() const { return components.empty() ? 0 : static_cast<int>(components[0].mu.size()); }
};

void validate(const MixtureModel& model);

GhdParams as_ghd(const Component& c);
StParams as_st(const Component& c);

// Per-iteration E-step state. resp/a/b/c are n x G; the conditional pieces
// of each (pattern group, component) pair are shared across the group's
// rows, with the per-row conditional location stored alongside.
struct EStepCache {
    Matrix resp;
    Matrix a;
    Matrix b;
    Matrix c;
    double loglik = 0.0;

    std::vector<MissingPatternGroup> groups;
    struct GroupComp {
        Vector beta_mo;
        Matrix sigma_mo;
        std::vector<Vector> mu_mo;  // one per row of the group
    };
    std::vector<std::vector<GroupComp>> cond;  // [group][component]
    std::vector<int> group_of_row;
    std::vector<int> index_in_group;
};

struct SufficientStats {
    std::vector<double> n_g;
    std::vector<double> abar, bbar, cbar;
    std::vector<Vector> xbar_g;  // observed/imputed stacked means
};

struct FitConfig {
    int max_iter = 1000;
    double epsilon = 1e-6;
    int n_starts = 5;
    enum class Init { KMeans, Random, Labels };
    Init init = Init::KMeans;
    std::vector<int> init_labels;  // used when init == Labels (0-based)
    std::uint64_t seed = 0;
    bool fix_beta_zero = false;  // freeze beta at 0 (symmetric fit)
    bool fix_latent = false;     // freeze lambda/omega or dof
};

struct FitReport {
    MixtureModel model;
    std::vector<double> loglik_trace;
    double loglik = 0.0;
    double bic = 0.0;
    double icl = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<int> map_labels;  // 0-based
    Matrix imputed;
    Matrix resp;
    int ridge_events = 0;
    int latent_update_fallbacks = 0;
};

struct DegenerateComponentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double observed_log_likelihood(const MaskedDataset& ds, const MixtureModel& model);

EStepCache e_step(const MaskedDataset& ds, const MixtureModel& model);

SufficientStats sufficient_stats(const MaskedDataset& ds, const EStepCache& cache);

// M-step pieces. Each updates `model` in place from the cache and returns
// diagnostics where useful. The location/skew update solves the joint
// two-vector system; with fix_beta_zero the skew stays at zero and the
// location update collapses to the inverse-scale weighted mean.
void m_step_weights_location_skew(const MaskedDataset& ds, const EStepCache& cache,
                                  MixtureModel& model, bool fix_beta_zero);

// Builds the per-observation scale blocks, averages them, applies the
// skewness corrections, and projects through the structure constraint
// (warm-started on the previous scale matrices).
void m_step_scale(const MaskedDataset& ds, const EStepCache& cache, MixtureModel& model,
                  int* ridge_events = nullptr);

// Index/concentration update for the generalized hyperbolic family; both
// steps are safeguarded so the profile objective never decreases. Returns
// the number of components that kept their previous values.
int update_index_concentration(const EStepCache& cache, MixtureModel& model);

// Degrees-of-freedom update for the skew-t family (safeguarded bisection on
// [2.001, 200], clamped at the ends). Returns the number of clamped
// components.
int update_dof(const EStepCache& cache, MixtureModel& model);

MixtureModel initialize(const MaskedDataset& ds, int G, Family family,
                        CovarianceStructure structure, const FitConfig& cfg, std::uint64_t seed);

FitReport fit(const MaskedDataset& ds, int G, Family family, CovarianceStructure structure,
              const FitConfig& cfg);

struct Prediction {
    Matrix resp;
    std::vector<int> labels;  // 0-based
    Matrix imputed;
};
Prediction predict(const MixtureModel& model, const MaskedDataset& ds);

// Seeded k-means on complete data: deterministic center draw, a fixed ten
// Lloyd sweeps, empty clusters re-seeded on the farthest point.
std::vector<int> kmeans_labels(const Matrix& data, int G, std::uint64_t seed);

}  // namespace hyperclust
