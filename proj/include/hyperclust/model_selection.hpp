#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperclust/em.hpp"

namespace hyperclust {

// BIC = 2 l - rho log n. Bigger is better.
double bic(double loglik, int rho, int n);

// ICL = BIC + 2 sum_i sum_g MAP{z_ig} log z_ig, with 0 log 0 = 0 and the
// MAP one-hot breaking ties toward the lowest component index.
double icl(double bic_value, const Matrix& resp);

// Aitken acceleration stopping rule on three consecutive log-likelihoods.
bool aitken_converged(double l_prev2, double l_prev, double l_curr, double epsilon);

// Hubert-Arabie adjusted Rand index.
double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct ModelGrid {
    std::vector<int> G_values;
    std::vector<CovarianceStructure> structures;
    std::vector<Family> families;
};

struct SelectionRow {
    Family family;
    CovarianceStructure structure;
    int G = 0;
    double loglik = 0.0;
    int rho = 0;
    double bic = 0.0;
    double icl = 0.0;
    bool converged = false;
    bool fit_ok = false;
    std::string error;
};

struct SelectionReport {
    std::vector<SelectionRow> table;
    int best_by_bic = -1;  // index into table, -1 when nothing converged
    int best_by_icl = -1;
    std::vector<FitReport> fits;  // aligned with table; empty model on failure
};

// Fits every grid cell and tabulates. Cells run independently (and possibly
// concurrently); the report order and seeds are fixed by the grid order.
SelectionReport search(const MaskedDataset& ds, const ModelGrid& grid, const FitConfig& cfg);

}  // namespace hyperclust
