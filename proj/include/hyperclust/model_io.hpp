#pragma once

#include <optional>
#include <string>

#include "hyperclust/em.hpp"

namespace hyperclust {

// Column standardization applied before fitting; imputed output is mapped
// back to original units.
struct ColumnScaling {
    Vector mean;
    Vector sd;
};

struct SavedModel {
    MixtureModel model;
    std::optional<ColumnScaling> scaling;
};

// Versioned human-readable serialization ("hyperclust-model v1"). Floats are
// written with enough digits to round-trip exactly.
void save_model(const std::string& path, const MixtureModel& model,
                const std::optional<ColumnScaling>& scaling = std::nullopt);

SavedModel load_model(const std::string& path);

}  // namespace hyperclust
