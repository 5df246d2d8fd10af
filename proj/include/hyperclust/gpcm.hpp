#pragma once

#include <string>
#include <vector>

#include "hyperclust/linalg.hpp"

namespace hyperclust {

enum class Family { Mghd, Mst };

std::string to_string(Family f);
Family parse_family(const std::string& name);

// The fourteen eigen-decomposed scale structures, named by the
// volume/shape/orientation convention (E = equal, V = variable,
// I = spherical or axis-aligned).
enum class CovarianceStructure {
    EII, VII, EEI, VEI, EVI, VVI, EEE, VEE, EVE, EEV, VVE, VEV, EVV, VVV,
};

const std::vector<CovarianceStructure>& all_structures();
std::string to_string(CovarianceStructure s);
// Throws std::invalid_argument listing the valid tags on a bad name.
CovarianceStructure parse_structure(const std::string& tag);

// Weighted scatter matrices S_g with their weights n_g. The constrained
// maximizers below target the criterion
//   -1/2 sum_g [ n_g log|Sigma_g| + tr(Sigma_g^{-1} S_g) ].
struct ScatterSet {
    std::vector<Matrix> scatters;
    std::vector<double> weights;

    int groups() const { return static_cast<int>(scatters.size()); }
    int dim() const { return scatters.empty() ? 0 : static_cast<int>(scatters[0].rows()); }
};

struct ConstrainResult {
    std::vector<Matrix> sigmas;
    bool converged = true;     // false when an inner iteration hit its cap
    int inner_iterations = 0;  // iterations used by the alternating schemes
};

// Maximize the criterion subject to the structure's pattern. Structures
// without a closed form (VEI, VEE, EVE, VVE, VEV) run an alternating scheme
// with inner tolerance 1e-8 and a cap of 100 sweeps; `warm_start`, when
// given, seeds that scheme (and guarantees the criterion cannot drop below
// its value at the warm start).
ConstrainResult constrain(const ScatterSet& sc, CovarianceStructure structure,
                          const std::vector<Matrix>* warm_start = nullptr);

double scatter_criterion(const ScatterSet& sc, const std::vector<Matrix>& sigmas);

// Number of free scale parameters contributed by the structure.
int scale_parameter_count(CovarianceStructure s, int p, int G);

// Total free parameters: weights + locations + skews + scale + per-component
// index/concentration (two for the generalized hyperbolic family, one
// degrees-of-freedom for the skew-t family).
int free_parameter_count(CovarianceStructure s, int p, int G, Family family);

}  // namespace hyperclust
