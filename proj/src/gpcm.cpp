#include "hyperclust/gpcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyperclust {

std::string to_string(Family f) { return f == Family::Mghd ? "MGHD" : "MST"; }

Family parse_family(const std::string& name) {
    if (name == "MGHD" || name == "mghd") return Family::Mghd;
    if (name == "MST" || name == "mst") return Family::Mst;
    throw std::invalid_argument("unknown family '" + name + "' (expected MGHD or MST)");
}

const std::vector<CovarianceStructure>& all_structures() {
    static const std::vector<CovarianceStructure> all = {
        CovarianceStructure::EII, CovarianceStructure::VII, CovarianceStructure::EEI,
        CovarianceStructure::VEI, CovarianceStructure::EVI, CovarianceStructure::VVI,
        CovarianceStructure::EEE, CovarianceStructure::VEE, CovarianceStructure::EVE,
        CovarianceStructure::EEV, CovarianceStructure::VVE, CovarianceStructure::VEV,
        CovarianceStructure::EVV, CovarianceStructure::VVV,
    };
    return all;
}

std::string to_string(CovarianceStructure s) {
    switch (s) {
        case CovarianceStructure::EII: return "EII";
        case CovarianceStructure::VII: return "VII";
        case CovarianceStructure::EEI: return "EEI";
        case CovarianceStructure::VEI: return "VEI";
        case CovarianceStructure::EVI: return "EVI";
        case CovarianceStructure::VVI: return "VVI";
        case CovarianceStructure::EEE: return "EEE";
        case CovarianceStructure::VEE: return "VEE";
        case CovarianceStructure::EVE: return "EVE";
        case CovarianceStructure::EEV: return "EEV";
        case CovarianceStructure::VVE: return "VVE";
        case CovarianceStructure::VEV: return "VEV";
        case CovarianceStructure::EVV: return "EVV";
        case CovarianceStructure::VVV: return "VVV";
    }
    throw std::logic_error("unreachable");
}

CovarianceStructure parse_structure(const std::string& tag) {
    for (CovarianceStructure s : all_structures()) {
        if (to_string(s) == tag) return s;
    }
    std::string valid;
    for (CovarianceStructure s : all_structures()) {
        if (!valid.empty()) valid += ", ";
        valid += to_string(s);
    }
    throw std::invalid_argument("unknown covariance structure '" + tag + "' (valid tags: " +
                                valid + ")");
}

namespace {

constexpr double kInnerTol = 1e-8;
constexpr int kInnerCap = 100;

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double log_det_spd(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("constrain: scatter produced a non-PD candidate");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Eigen-decomposition with descending eigenvalues and a deterministic sign
// convention (first component of nontrivial magnitude made positive).
void eig_desc(const Matrix& m, Vector& values, Matrix& vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m));
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("constrain: eigen decomposition failed");
    }
    const int p = static_cast<int>(m.rows());
    values.resize(p);
    vectors.resize(p, p);
    for (int k = 0; k < p; ++k) {
        values[k] = es.eigenvalues()[p - 1 - k];
        Vector v = es.eigenvectors().col(p - 1 - k);
        for (int i = 0; i < p; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0.0) v = -v;
                break;
            }
        }
        vectors.col(k) = v;
    }
}

double geometric_mean_diag(const Vector& d) {
    double acc = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) throw std::runtime_error("constrain: nonpositive diagonal scatter");
        acc += std::log(d[i]);
    }
    return std::exp(acc / d.size());
}

double det_root(const Matrix& m) { return std::exp(log_det_spd(m) / m.rows()); }

struct Problem {
    const ScatterSet& sc;
    int G;
    int p;
    double N;
};

double criterion(const Problem& pr, const std::vector<Matrix>& sigmas) {
    double acc = 0.0;
    for (int g = 0; g < pr.G; ++g) {
        Eigen::LLT<Matrix> llt(sigmas[g]);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("constrain: non-PD sigma in criterion");
        }
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        acc += pr.sc.weights[g] * logdet + llt.solve(pr.sc.scatters[g]).trace();
    }
    return -0.5 * acc;
}

// --- closed forms ----------------------------------------------------------

std::vector<Matrix> fit_vvv(const Problem& pr) {
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) out[g] = sym(pr.sc.scatters[g] / pr.sc.weights[g]);
    return out;
}

std::vector<Matrix> fit_eee(const Problem& pr) {
    Matrix pooled = Matrix::Zero(pr.p, pr.p);
    for (int g = 0; g < pr.G; ++g) pooled += pr.sc.scatters[g];
    pooled = sym(pooled / pr.N);
    return std::vector<Matrix>(pr.G, pooled);
}

std::vector<Matrix> fit_eii(const Problem& pr) {
    double tr = 0.0;
    for (int g = 0; g < pr.G; ++g) tr += pr.sc.scatters[g].trace();
    return std::vector<Matrix>(pr.G, (tr / (pr.N * pr.p)) * Matrix::Identity(pr.p, pr.p));
}

std::vector<Matrix> fit_vii(const Problem& pr) {
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        out[g] = (pr.sc.scatters[g].trace() / (pr.sc.weights[g] * pr.p)) *
                 Matrix::Identity(pr.p, pr.p);
    }
    return out;
}

std::vector<Matrix> fit_eei(const Problem& pr) {
    Vector d = Vector::Zero(pr.p);
    for (int g = 0; g < pr.G; ++g) d += pr.sc.scatters[g].diagonal();
    return std::vector<Matrix>(pr.G, (d / pr.N).asDiagonal());
}

std::vector<Matrix> fit_vvi(const Problem& pr) {
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        out[g] = (pr.sc.scatters[g].diagonal() / pr.sc.weights[g]).asDiagonal();
    }
    return out;
}

std::vector<Matrix> fit_evi(const Problem& pr) {
    double lam = 0.0;
    std::vector<Vector> shapes(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        const Vector d = pr.sc.scatters[g].diagonal();
        const double gm = geometric_mean_diag(d);
        shapes[g] = d / gm;
        lam += gm;
    }
    lam /= pr.N;
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) out[g] = (lam * shapes[g]).asDiagonal();
    return out;
}

std::vector<Matrix> fit_eev(const Problem& pr) {
    Vector shape = Vector::Zero(pr.p);
    std::vector<Matrix> rot(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        Vector vals;
        eig_desc(pr.sc.scatters[g], vals, rot[g]);
        shape += vals;
    }
    shape /= pr.N;
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) out[g] = sym(rot[g] * shape.asDiagonal() * rot[g].transpose());
    return out;
}

std::vector<Matrix> fit_evv(const Problem& pr) {
    double lam = 0.0;
    std::vector<Matrix> cores(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        const double root = det_root(pr.sc.scatters[g]);
        cores[g] = pr.sc.scatters[g] / root;
        lam += root;
    }
    lam /= pr.N;
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) out[g] = sym(lam * cores[g]);
    return out;
}

// --- alternating schemes ----------------------------------------------------

struct IterState {
    bool converged = true;
    int iterations = 0;
};

// VEI: Sigma_g = lambda_g * Delta (diagonal, |Delta| = 1).
std::vector<Matrix> fit_vei(const Problem& pr, const std::vector<Matrix>* warm, IterState& st) {
    Vector delta;
    if (warm && !warm->empty()) {
        delta = (*warm)[0].diagonal();
    } else {
        delta = Vector::Zero(pr.p);
        for (int g = 0; g < pr.G; ++g) delta += pr.sc.scatters[g].diagonal();
    }
    delta /= geometric_mean_diag(delta);
    Vector lam(pr.G);
    double prev = -std::numeric_limits<double>::infinity();
    for (st.iterations = 1; st.iterations <= kInnerCap; ++st.iterations) {
        for (int g = 0; g < pr.G; ++g) {
            lam[g] = (pr.sc.scatters[g].diagonal().array() / delta.array()).sum() /
                     (pr.sc.weights[g] * pr.p);
        }
        Vector d = Vector::Zero(pr.p);
        for (int g = 0; g < pr.G; ++g) d += pr.sc.scatters[g].diagonal() / lam[g];
        delta = d / geometric_mean_diag(d);
        double obj = 0.0;
        for (int g = 0; g < pr.G; ++g) {
            obj += pr.sc.weights[g] * pr.p * std::log(lam[g]) +
                   (pr.sc.scatters[g].diagonal().array() / (lam[g] * delta.array())).sum();
        }
        if (std::abs(obj - prev) <= kInnerTol * (1.0 + std::abs(obj))) break;
        prev = obj;
        if (st.iterations == kInnerCap) st.converged = false;
    }
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) out[g] = (lam[g] * delta).asDiagonal();
    return out;
}

// VEE: Sigma_g = lambda_g * C with |C| = 1.
std::vector<Matrix> fit_vee(const Problem& pr, const std::vector<Matrix>* warm, IterState& st) {
    Matrix c;
    if (warm && !warm->empty()) {
        c = (*warm)[0];
    } else {
        c = Matrix::Zero(pr.p, pr.p);
        for (int g = 0; g < pr.G; ++g) c += pr.sc.scatters[g];
    }
    c = sym(c / det_root(c));
    Vector lam(pr.G);
    double prev = -std::numeric_limits<double>::infinity();
    for (st.iterations = 1; st.iterations <= kInnerCap; ++st.iterations) {
        const Eigen::LLT<Matrix> llt(c);
        for (int g = 0; g < pr.G; ++g) {
            lam[g] = llt.solve(pr.sc.scatters[g]).trace() / (pr.sc.weights[g] * pr.p);
        }
        Matrix m = Matrix::Zero(pr.p, pr.p);
        for (int g = 0; g < pr.G; ++g) m += pr.sc.scatters[g] / lam[g];
        c = sym(m / det_root(m));
        double obj = 0.0;
        const Eigen::LLT<Matrix> llt2(c);
        for (int g = 0; g < pr.G; ++g) {
            obj += pr.sc.weights[g] * pr.p * std::log(lam[g]) +
                   llt2.solve(pr.sc.scatters[g]).trace() / lam[g];
        }
        if (std::abs(obj - prev) <= kInnerTol * (1.0 + std::abs(obj))) break;
        prev = obj;
        if (st.iterations == kInnerCap) st.converged = false;
    }
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) out[g] = sym(lam[g] * c);
    return out;
}

// Majorize-minimize sweep for a shared orientation: minimizes
// sum_g tr(Gamma A_g^{-1} Gamma' S_g) over orthogonal Gamma.
Matrix mm_orientation(const Problem& pr, const std::vector<Vector>& a_diag, Matrix gamma) {
    std::vector<double> xi(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        Vector vals;
        Matrix vecs;
        eig_desc(pr.sc.scatters[g], vals, vecs);
        xi[g] = vals[0];
    }
    for (int sweep = 0; sweep < 8; ++sweep) {
        Matrix m = Matrix::Zero(pr.p, pr.p);
        for (int g = 0; g < pr.G; ++g) {
            m += (xi[g] * gamma - pr.sc.scatters[g] * gamma) * a_diag[g].cwiseInverse().asDiagonal();
        }
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Matrix next = svd.matrixU() * svd.matrixV().transpose();
        const double drift = (next - gamma).cwiseAbs().maxCoeff();
        gamma = next;
        if (drift < 1e-12) break;
    }
    return gamma;
}

// EVE (equal volume) and VVE (variable volume): Sigma_g = vol_g Gamma D_g Gamma'.
std::vector<Matrix> fit_shared_orientation(const Problem& pr, bool equal_volume,
                                           const std::vector<Matrix>* warm, IterState& st) {
    Matrix gamma;
    if (warm && !warm->empty()) {
        Vector vals;
        eig_desc((*warm)[0], vals, gamma);
    } else {
        Matrix pooled = Matrix::Zero(pr.p, pr.p);
        for (int g = 0; g < pr.G; ++g) pooled += pr.sc.scatters[g];
        Vector vals;
        eig_desc(pooled, vals, gamma);
    }
    std::vector<Vector> a_diag(pr.G, Vector::Ones(pr.p));
    double prev = -std::numeric_limits<double>::infinity();
    std::vector<Matrix> out(pr.G);
    for (st.iterations = 1; st.iterations <= kInnerCap; ++st.iterations) {
        // shape (and volume) given the orientation
        double lam_equal = 0.0;
        std::vector<Vector> omegas(pr.G);
        for (int g = 0; g < pr.G; ++g) {
            omegas[g] = (gamma.transpose() * pr.sc.scatters[g] * gamma).diagonal();
            if (equal_volume) {
                const double gm = geometric_mean_diag(omegas[g]);
                a_diag[g] = omegas[g] / gm;  // unit-determinant shape
                lam_equal += gm;
            } else {
                a_diag[g] = omegas[g] / pr.sc.weights[g];  // vol_g * Delta_g combined
            }
        }
        if (equal_volume) {
            lam_equal /= pr.N;
            for (int g = 0; g < pr.G; ++g) a_diag[g] *= lam_equal;
        }
        // orientation given shape
        gamma = mm_orientation(pr, a_diag, gamma);

        double obj = 0.0;
        for (int g = 0; g < pr.G; ++g) {
            const Vector om = (gamma.transpose() * pr.sc.scatters[g] * gamma).diagonal();
            obj += pr.sc.weights[g] * a_diag[g].array().log().sum() +
                   (om.array() / a_diag[g].array()).sum();
        }
        if (std::abs(obj - prev) <= kInnerTol * (1.0 + std::abs(obj))) break;
        prev = obj;
        if (st.iterations == kInnerCap) st.converged = false;
    }
    for (int g = 0; g < pr.G; ++g) {
        out[g] = sym(gamma * a_diag[g].asDiagonal() * gamma.transpose());
    }
    return out;
}

// VEV: Sigma_g = lambda_g Gamma_g Delta Gamma_g' with per-group orientation.
std::vector<Matrix> fit_vev(const Problem& pr, const std::vector<Matrix>* warm, IterState& st) {
    std::vector<Vector> omegas(pr.G);
    std::vector<Matrix> rot(pr.G);
    for (int g = 0; g < pr.G; ++g) eig_desc(pr.sc.scatters[g], omegas[g], rot[g]);

    Vector delta;
    if (warm && !warm->empty()) {
        Matrix vecs;
        eig_desc((*warm)[0], delta, vecs);
    } else {
        delta = Vector::Zero(pr.p);
        for (int g = 0; g < pr.G; ++g) delta += omegas[g];
    }
    delta /= geometric_mean_diag(delta);
    Vector lam(pr.G);
    double prev = -std::numeric_limits<double>::infinity();
    for (st.iterations = 1; st.iterations <= kInnerCap; ++st.iterations) {
        for (int g = 0; g < pr.G; ++g) {
            lam[g] = (omegas[g].array() / delta.array()).sum() / (pr.sc.weights[g] * pr.p);
        }
        Vector d = Vector::Zero(pr.p);
        for (int g = 0; g < pr.G; ++g) d += omegas[g] / lam[g];
        delta = d / geometric_mean_diag(d);
        double obj = 0.0;
        for (int g = 0; g < pr.G; ++g) {
            obj += pr.sc.weights[g] * pr.p * std::log(lam[g]) +
                   (omegas[g].array() / (lam[g] * delta.array())).sum();
        }
        if (std::abs(obj - prev) <= kInnerTol * (1.0 + std::abs(obj))) break;
        prev = obj;
        if (st.iterations == kInnerCap) st.converged = false;
    }
    std::vector<Matrix> out(pr.G);
    for (int g = 0; g < pr.G; ++g) {
        out[g] = sym(rot[g] * (lam[g] * delta).asDiagonal() * rot[g].transpose());
    }
    return out;
}

}  // namespace

double scatter_criterion(const ScatterSet& sc, const std::vector<Matrix>& sigmas) {
    Problem pr{sc, sc.groups(), sc.dim(), 0.0};
    for (double w : sc.weights) pr.N += w;
    return criterion(pr, sigmas);
}

ConstrainResult constrain(const ScatterSet& sc, CovarianceStructure structure,
                          const std::vector<Matrix>* warm_start) {
    if (sc.groups() == 0 || sc.groups() != static_cast<int>(sc.weights.size())) {
        throw std::invalid_argument("constrain: scatters and weights must align");
    }
    Problem pr{sc, sc.groups(), sc.dim(), 0.0};
    for (int g = 0; g < pr.G; ++g) {
        if (!(sc.weights[g] > 0.0)) throw std::invalid_argument("constrain: weights must be positive");
        require_symmetric(sc.scatters[g], 1e-8 * (1.0 + sc.scatters[g].cwiseAbs().maxCoeff()),
                          "constrain");
        pr.N += sc.weights[g];
    }

    ConstrainResult res;
    IterState st;
    switch (structure) {
        case CovarianceStructure::EII: res.sigmas = fit_eii(pr); break;
        case CovarianceStructure::VII: res.sigmas = fit_vii(pr); break;
        case CovarianceStructure::EEI: res.sigmas = fit_eei(pr); break;
        case CovarianceStructure::VEI: res.sigmas = fit_vei(pr, warm_start, st); break;
        case CovarianceStructure::EVI: res.sigmas = fit_evi(pr); break;
        case CovarianceStructure::VVI: res.sigmas = fit_vvi(pr); break;
        case CovarianceStructure::EEE: res.sigmas = fit_eee(pr); break;
        case CovarianceStructure::VEE: res.sigmas = fit_vee(pr, warm_start, st); break;
        case CovarianceStructure::EVE:
            res.sigmas = fit_shared_orientation(pr, true, warm_start, st);
            break;
        case CovarianceStructure::EEV: res.sigmas = fit_eev(pr); break;
        case CovarianceStructure::VVE:
            res.sigmas = fit_shared_orientation(pr, false, warm_start, st);
            break;
        case CovarianceStructure::VEV: res.sigmas = fit_vev(pr, warm_start, st); break;
        case CovarianceStructure::EVV: res.sigmas = fit_evv(pr); break;
        case CovarianceStructure::VVV: res.sigmas = fit_vvv(pr); break;
    }
    res.converged = st.converged;
    res.inner_iterations = st.iterations;

    // A warm start must never be beaten by its own refinement.
    if (warm_start && !warm_start->empty() &&
        static_cast<int>(warm_start->size()) == pr.G) {
        try {
            if (criterion(pr, *warm_start) > criterion(pr, res.sigmas)) {
                res.sigmas = *warm_start;
            }
        } catch (const std::runtime_error&) {
            // non-PD warm start: keep the fresh fit
        }
    }
    return res;
}

int scale_parameter_count(CovarianceStructure s, int p, int G) {
    const int orient_e = p * (p - 1) / 2;
    const int orient_v = G * orient_e;
    switch (s) {
        case CovarianceStructure::EII: return 1;
        case CovarianceStructure::VII: return G;
        case CovarianceStructure::EEI: return p;
        case CovarianceStructure::VEI: return G + (p - 1);
        case CovarianceStructure::EVI: return 1 + G * (p - 1);
        case CovarianceStructure::VVI: return G * p;
        case CovarianceStructure::EEE: return p + orient_e;
        case CovarianceStructure::VEE: return G + (p - 1) + orient_e;
        case CovarianceStructure::EVE: return 1 + G * (p - 1) + orient_e;
        case CovarianceStructure::EEV: return p + orient_v;
        case CovarianceStructure::VVE: return G * p + orient_e;
        case CovarianceStructure::VEV: return G + (p - 1) + orient_v;
        case CovarianceStructure::EVV: return 1 + G * (p - 1) + orient_v;
        case CovarianceStructure::VVV: return G * p * (p + 1) / 2;
    }
    throw std::logic_error("unreachable");
}

int free_parameter_count(CovarianceStructure s, int p, int G, Family family) {
    if (p < 1 || G < 1) throw std::invalid_argument("free_parameter_count: p, G must be >= 1");
    const int mixing = G - 1;
    const int location = G * p;
    const int skew = G * p;
    const int latent = (family == Family::Mghd) ? 2 * G : G;
    return mixing + location + skew + scale_parameter_count(s, p, G) + latent;
}

}  // namespace hyperclust
