#include "hyperclust/model_selection.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "hyperclust/parallel.hpp"

namespace hyperclust {

double bic(double loglik, int rho, int n) {
    if (n < 1) throw std::invalid_argument("bic: n must be >= 1");
    return 2.0 * loglik - rho * std::log(static_cast<double>(n));
}

double icl(double bic_value, const Matrix& resp) {
    const int n = static_cast<int>(resp.rows()), G = static_cast<int>(resp.cols());
    double entropy = 0.0;
    for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best = resp(i, 0);
        for (int g = 1; g < G; ++g) {
            if (resp(i, g) > best) {
                best = resp(i, g);
                arg = g;
            }
        }
        if (resp(i, arg) > 0.0) entropy += std::log(resp(i, arg));
    }
    return bic_value + 2.0 * entropy;
}

bool aitken_converged(double l_prev2, double l_prev, double l_curr, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("aitken_converged: epsilon must be > 0");
    const double denom = l_prev - l_prev2;
    if (denom == 0.0) return false;
    const double a = (l_curr - l_prev) / denom;
    if (!(a < 1.0)) return false;  // no asymptotic estimate available
    const double l_inf = l_prev + (l_curr - l_prev) / (1.0 - a);
    const double diff = l_inf - l_prev;
    return diff >= 0.0 && diff < epsilon;
}

double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw std::invalid_argument("adjusted_rand_index: label vectors differ in length");
    }
    const auto n = labels_a.size();
    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> rows, cols;
    for (size_t i = 0; i < n; ++i) {
        ++cells[{labels_a[i], labels_b[i]}];
        ++rows[labels_a[i]];
        ++cols[labels_b[i]];
    }
    auto choose2 = [](long long m) { return 0.5 * m * (m - 1.0); };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& kv : cells) sum_cells += choose2(kv.second);
    for (const auto& kv : rows) sum_rows += choose2(kv.second);
    for (const auto& kv : cols) sum_cols += choose2(kv.second);
    const double total = choose2(static_cast<long long>(n));
    if (total == 0.0) return labels_a == labels_b ? 1.0 : 0.0;
    const double expected = sum_rows * sum_cols / total;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) {
        // both partitions degenerate (all-singleton or single-block)
        return sum_rows == sum_cols ? 1.0 : 0.0;
    }
    return (sum_cells - expected) / (maximum - expected);
}

SelectionReport search(const MaskedDataset& ds, const ModelGrid& grid, const FitConfig& cfg) {
    if (grid.G_values.empty() || grid.structures.empty() || grid.families.empty()) {
        throw std::invalid_argument("search: grid must be nonempty");
    }
    struct Cell {
        Family family;
        CovarianceStructure structure;
        int G;
    };
    std::vector<Cell> cells;
    for (Family f : grid.families) {
        for (CovarianceStructure s : grid.structures) {
            for (int G : grid.G_values) {
                if (G < 1) throw std::invalid_argument("search: G must be >= 1");
                cells.push_back({f, s, G});
            }
        }
    }

    SelectionReport report;
    report.table.resize(cells.size());
    report.fits.resize(cells.size());
    parallel_for_tasks(static_cast<int>(cells.size()), [&](int i) {
        const Cell& cell = cells[i];
        SelectionRow row;
        row.family = cell.family;
        row.structure = cell.structure;
        row.G = cell.G;
        row.rho = free_parameter_count(cell.structure, ds.cols(), cell.G, cell.family);
        try {
            FitReport fr = fit(ds, cell.G, cell.family, cell.structure, cfg);
            row.loglik = fr.loglik;
            row.bic = fr.bic;
            row.icl = fr.icl;
            row.converged = fr.converged;
            row.fit_ok = true;
            report.fits[i] = std::move(fr);
        } catch (const std::exception& err) {
            row.fit_ok = false;
            row.error = err.what();
        }
        report.table[i] = row;
    });

    bool any_ok = false, any_converged = false;
    for (const auto& row : report.table) {
        any_ok = any_ok || row.fit_ok;
        any_converged = any_converged || (row.fit_ok && row.converged);
    }
    for (size_t i = 0; i < report.table.size(); ++i) {
        const SelectionRow& row = report.table[i];
        if (!row.fit_ok) continue;
        // Converged fits win the selection; when none converged (the gh
        // index/concentration profile can crawl past any iteration budget)
        // the completed fits are ranked instead.
        if (any_converged && !row.converged) continue;
        if (report.best_by_bic < 0 || row.bic > report.table[report.best_by_bic].bic) {
            report.best_by_bic = static_cast<int>(i);
        }
        if (report.best_by_icl < 0 || row.icl > report.table[report.best_by_icl].icl) {
            report.best_by_icl = static_cast<int>(i);
        }
    }
    if (!any_ok) {
        std::string detail;
        for (const auto& row : report.table) {
            detail += "\n  " + to_string(row.family) + "/" + to_string(row.structure) + "/G=" +
                      std::to_string(row.G) + ": " + row.error;
        }
        throw FitError("search: every grid cell failed" + detail);
    }
    return report;
}

}  // namespace hyperclust
