// Command-line frontend: fitting, model search, imputation, simulation
// studies, and partition scoring for the mixture engine.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperclust/csv.hpp"
#include "hyperclust/em.hpp"
#include "hyperclust/model_io.hpp"
#include "hyperclust/model_selection.hpp"
#include "hyperclust/simulation.hpp"

using namespace hyperclust;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

MissingMechanism parse_mechanism(const std::string& name) {
    if (name == "MCAR" || name == "mcar") return MissingMechanism::Mcar;
    if (name == "MAR1" || name == "mar1") return MissingMechanism::MarPattern1;
    if (name == "MAR2" || name == "mar2") return MissingMechanism::MarPattern2;
    throw CLI::ValidationError("--mechanism", "expected MCAR, MAR1 or MAR2, got '" + name + "'");
}

std::string structure_check(const std::string& tag) {
    try {
        parse_structure(tag);
    } catch (const std::exception& err) {
        return err.what();
    }
    return {};
}

std::string family_check(const std::string& name) {
    try {
        parse_family(name);
    } catch (const std::exception& err) {
        return err.what();
    }
    return {};
}

struct FitFlags {
    std::string input;
    std::string out;
    std::string family = "MGHD";
    std::string structure = "VVV";
    int G = 1;
    double epsilon = 1e-6;
    int max_iter = 1000;
    int n_starts = 5;
    std::uint64_t seed = 0;
    bool scale = false;
    std::string init = "kmeans";
    std::string init_labels_path;
    std::vector<std::string> na_tokens{"NA", "", "?"};
};

void add_fit_options(CLI::App* cmd, FitFlags& f, bool with_model_shape) {
    cmd->add_option("--input", f.input, "input CSV with a header row")->required();
    cmd->add_option("--out", f.out, "output file prefix")->required();
    if (with_model_shape) {
        cmd->add_option("--family", f.family, "mixture family (MGHD or MST)")
            ->check(CLI::Validator(family_check, "FAMILY"));
        cmd->add_option("--structure", f.structure, "covariance structure tag")
            ->check(CLI::Validator(structure_check, "STRUCTURE"));
        cmd->add_option("--G", f.G, "number of components")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--epsilon", f.epsilon, "Aitken stopping threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", f.max_iter, "iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--starts", f.n_starts, "number of EM starts")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_flag("--scale", f.scale, "standardize columns by observed mean/sd before fitting");
    cmd->add_option("--init", f.init, "initialization: kmeans, random or labels")
        ->check(CLI::IsMember({"kmeans", "random", "labels"}));
    cmd->add_option("--init-labels", f.init_labels_path, "labels CSV for --init labels");
    cmd->add_option("--na-token", f.na_tokens, "cell values treated as missing");
}

FitConfig make_config(const FitFlags& f) {
    FitConfig cfg;
    cfg.epsilon = f.epsilon;
    cfg.max_iter = f.max_iter;
    cfg.n_starts = f.n_starts;
    cfg.seed = f.seed;
    if (f.init == "kmeans") cfg.init = FitConfig::Init::KMeans;
    if (f.init == "random") cfg.init = FitConfig::Init::Random;
    if (f.init == "labels") {
        cfg.init = FitConfig::Init::Labels;
        if (f.init_labels_path.empty()) {
            throw std::invalid_argument("--init labels requires --init-labels");
        }
        cfg.init_labels = load_labels_csv(f.init_labels_path);
    }
    return cfg;
}

ColumnScaling observed_scaling(const MaskedDataset& ds) {
    const int p = ds.cols();
    ColumnScaling s;
    s.mean.resize(p);
    s.sd.resize(p);
    for (int j = 0; j < p; ++j) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < ds.rows(); ++i) {
            if (!ds.mask(i, j)) {
                sum += ds.data(i, j);
                ++count;
            }
        }
        if (count < 2) {
            throw std::invalid_argument("--scale: column " + std::to_string(j + 1) +
                                        " has fewer than two observed values");
        }
        s.mean[j] = sum / count;
        double ss = 0.0;
        for (int i = 0; i < ds.rows(); ++i) {
            if (!ds.mask(i, j)) ss += (ds.data(i, j) - s.mean[j]) * (ds.data(i, j) - s.mean[j]);
        }
        s.sd[j] = std::sqrt(ss / (count - 1));
        if (!(s.sd[j] > 0.0)) {
            throw std::invalid_argument("--scale: column " + std::to_string(j + 1) +
                                        " is constant");
        }
    }
    return s;
}

MaskedDataset apply_scaling(const MaskedDataset& ds, const ColumnScaling& s) {
    MaskedDataset out = ds;
    for (int i = 0; i < ds.rows(); ++i) {
        for (int j = 0; j < ds.cols(); ++j) {
            if (!out.mask(i, j)) out.data(i, j) = (out.data(i, j) - s.mean[j]) / s.sd[j];
        }
    }
    return out;
}

Matrix unscale(const Matrix& data, const ColumnScaling& s) {
    Matrix out = data;
    for (int i = 0; i < out.rows(); ++i) {
        for (int j = 0; j < out.cols(); ++j) out(i, j) = out(i, j) * s.sd[j] + s.mean[j];
    }
    return out;
}

void write_fit_report(const std::string& path, const FitReport& report, const MixtureModel& model,
                      int n, int p) {
    std::ostringstream out;
    out << "hyperclust-fit v1\n";
    out << "family " << to_string(model.family) << '\n';
    out << "structure " << to_string(model.structure) << '\n';
    out << "G " << model.groups() << '\n';
    out << "n " << n << '\n';
    out << "p " << p << '\n';
    out << "loglik " << format_double(report.loglik) << '\n';
    out << "rho " << free_parameter_count(model.structure, p, model.groups(), model.family)
        << '\n';
    out << "bic " << format_double(report.bic) << '\n';
    out << "icl " << format_double(report.icl) << '\n';
    out << "converged " << (report.converged ? 1 : 0) << '\n';
    out << "iterations " << report.iterations << '\n';
    out << "ridge_events " << report.ridge_events << '\n';
    out << "loglik_trace";
    for (double v : report.loglik_trace) out << ' ' << format_double(v);
    out << '\n';
    write_text_atomic(path, out.str());
}

int cmd_fit(const FitFlags& f) {
    const MaskedDataset raw = load_csv(f.input, f.na_tokens);
    std::optional<ColumnScaling> scaling;
    MaskedDataset ds = raw;
    if (f.scale) {
        scaling = observed_scaling(raw);
        ds = apply_scaling(raw, *scaling);
    }
    const FitConfig cfg = make_config(f);
    const FitReport report =
        fit(ds, f.G, parse_family(f.family), parse_structure(f.structure), cfg);

    save_model(f.out + ".model", report.model, scaling);
    write_labels_csv(f.out + ".labels.csv", report.map_labels);
    const Matrix imputed = scaling ? unscale(report.imputed, *scaling) : report.imputed;
    write_matrix_csv(f.out + ".imputed.csv", imputed, raw.column_names);
    write_fit_report(f.out + ".report.txt", report, report.model, ds.rows(), ds.cols());
    std::printf("fit: loglik=%s bic=%s icl=%s converged=%d iterations=%d\n",
                format_double(report.loglik).c_str(), format_double(report.bic).c_str(),
                format_double(report.icl).c_str(), report.converged ? 1 : 0, report.iterations);
    return kExitOk;
}

int cmd_search(const FitFlags& f, const std::vector<std::string>& families,
               const std::vector<std::string>& structures, std::vector<int> g_values) {
    const MaskedDataset raw = load_csv(f.input, f.na_tokens);
    std::optional<ColumnScaling> scaling;
    MaskedDataset ds = raw;
    if (f.scale) {
        scaling = observed_scaling(raw);
        ds = apply_scaling(raw, *scaling);
    }

    ModelGrid grid;
    if (g_values.empty()) g_values = {1, 2, 3, 4};
    grid.G_values = g_values;
    if (structures.empty()) {
        grid.structures = all_structures();
    } else {
        for (const auto& tag : structures) grid.structures.push_back(parse_structure(tag));
    }
    if (families.empty()) {
        grid.families = {Family::Mghd, Family::Mst};
    } else {
        for (const auto& name : families) grid.families.push_back(parse_family(name));
    }

    const SelectionReport report = search(ds, grid, make_config(f));

    std::ostringstream out;
    out << "family,structure,G,loglik,rho,bic,icl,converged,fit_ok,best_by_bic,best_by_icl,"
           "error\n";
    for (size_t i = 0; i < report.table.size(); ++i) {
        const SelectionRow& row = report.table[i];
        out << to_string(row.family) << ',' << to_string(row.structure) << ',' << row.G << ','
            << (row.fit_ok ? format_double(row.loglik) : "NA") << ',' << row.rho << ','
            << (row.fit_ok ? format_double(row.bic) : "NA") << ','
            << (row.fit_ok ? format_double(row.icl) : "NA") << ',' << (row.converged ? 1 : 0)
            << ',' << (row.fit_ok ? 1 : 0) << ','
            << (static_cast<int>(i) == report.best_by_bic ? 1 : 0) << ','
            << (static_cast<int>(i) == report.best_by_icl ? 1 : 0) << ','
            << row.error << '\n';
    }
    write_text_atomic(f.out + ".selection.csv", out.str());

    if (report.best_by_bic >= 0) {
        const SelectionRow& row = report.table[report.best_by_bic];
        save_model(f.out + ".best.model", report.fits[report.best_by_bic].model, scaling);
        std::printf("search: best by BIC %s/%s/G=%d bic=%s%s\n", to_string(row.family).c_str(),
                    to_string(row.structure).c_str(), row.G, format_double(row.bic).c_str(),
                    row.converged ? "" : " (no cell converged; ranking completed fits)");
    } else {
        std::printf("search: no fit completed; see %s.selection.csv\n", f.out.c_str());
    }
    return kExitOk;
}

int cmd_impute(const std::string& model_path, const FitFlags& f) {
    const SavedModel saved = load_model(model_path);
    const MaskedDataset raw = load_csv(f.input, f.na_tokens);
    MaskedDataset ds = raw;
    if (saved.scaling) ds = apply_scaling(raw, *saved.scaling);
    const Prediction pred = predict(saved.model, ds);
    const Matrix imputed = saved.scaling ? unscale(pred.imputed, *saved.scaling) : pred.imputed;
    write_matrix_csv(f.out + ".imputed.csv", imputed, raw.column_names);
    write_labels_csv(f.out + ".labels.csv", pred.labels);
    std::printf("impute: %d rows, %d columns\n", ds.rows(), ds.cols());
    return kExitOk;
}

int cmd_simulate(const std::string& design_id, int n_per_component, const std::string& mechanism,
                 double rate, std::uint64_t seed, const std::string& out) {
    SimDesign design = builtin_design(design_id);
    if (n_per_component > 0) design.n_per_component = n_per_component;
    const SimData sim = generate(design, seed);

    std::vector<std::string> names;
    for (int j = 0; j < sim.data.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    if (mechanism.empty()) {
        write_matrix_csv(out + ".data.csv", sim.data, names);
    } else {
        const MaskedDataset ds =
            inject_missingness(sim.data, parse_mechanism(mechanism), rate, seed + 1);
        write_matrix_csv(out + ".data.csv", ds.data, names, &ds.mask);
    }
    write_labels_csv(out + ".labels.csv", sim.labels);
    std::printf("simulate: %s wrote %d rows\n", design_id.c_str(),
                static_cast<int>(sim.data.rows()));
    return kExitOk;
}

int cmd_study(const std::string& design_id, const std::vector<std::string>& mechanisms,
              const std::vector<double>& rates, int replications, const FitFlags& f,
              const std::vector<std::string>& families, const std::vector<std::string>& structures,
              std::vector<int> g_values) {
    const SimDesign design = builtin_design(design_id);
    std::vector<MissingMechanism> mechs;
    for (const auto& m : mechanisms) mechs.push_back(parse_mechanism(m));
    if (mechs.empty()) mechs = {MissingMechanism::Mcar};

    ModelGrid grid;
    grid.G_values = g_values.empty() ? std::vector<int>{design.components()} : g_values;
    if (structures.empty()) {
        grid.structures = {design.structure};
    } else {
        for (const auto& tag : structures) grid.structures.push_back(parse_structure(tag));
    }
    if (families.empty()) {
        grid.families = {design.family == SimFamily::Mst ? Family::Mst : Family::Mghd};
    } else {
        for (const auto& name : families) grid.families.push_back(parse_family(name));
    }

    const StudyTable table = run_study(design, mechs, rates.empty() ? std::vector<double>{0.05}
                                                                    : rates,
                                       replications, grid, make_config(f));

    auto mech_name = [](MissingMechanism m) {
        switch (m) {
            case MissingMechanism::Mcar: return "MCAR";
            case MissingMechanism::MarPattern1: return "MAR1";
            case MissingMechanism::MarPattern2: return "MAR2";
        }
        return "?";
    };

    std::ostringstream summary;
    summary << "design,family,mechanism,rate,replications,failures,mean_ari,sd_ari,mean_bic,"
               "correct_g\n";
    for (const auto& cell : table.cells) {
        summary << table.design_id << ',' << to_string(table.fit_family) << ','
                << mech_name(cell.mechanism) << ',' << format_double(cell.rate) << ','
                << cell.replications << ',' << cell.failures << ','
                << format_double(cell.mean_ari) << ',' << format_double(cell.sd_ari) << ','
                << format_double(cell.mean_bic) << ',' << cell.correct_g << '\n';
    }
    write_text_atomic(f.out + ".study_summary.csv", summary.str());

    std::ostringstream params;
    params << "design,mechanism,rate,component,parameter,truth,mean,sd,bias\n";
    for (const auto& cell : table.cells) {
        for (const auto& ps : cell.params) {
            params << table.design_id << ',' << mech_name(cell.mechanism) << ','
                   << format_double(cell.rate) << ',' << ps.component << ',' << ps.name << ','
                   << format_double(ps.truth) << ',' << format_double(ps.mean) << ','
                   << format_double(ps.sd) << ',' << format_double(ps.bias) << '\n';
        }
    }
    write_text_atomic(f.out + ".study_params.csv", params.str());
    std::printf("study: %s wrote %zu cells\n", design_id.c_str(), table.cells.size());
    return kExitOk;
}

int cmd_evaluate(const std::string& path_a, const std::string& path_b) {
    const auto a = load_labels_csv(path_a);
    const auto b = load_labels_csv(path_b);
    std::printf("ari %s\n", format_double(adjusted_rand_index(a, b)).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperclust: mixture clustering for incomplete data"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    auto* fit_cmd = app.add_subcommand("fit", "fit one mixture model");
    add_fit_options(fit_cmd, fit_flags, true);

    FitFlags search_flags;
    std::vector<std::string> search_families, search_structures;
    std::vector<int> search_g;
    auto* search_cmd = app.add_subcommand("search", "fit a model grid and rank by BIC/ICL");
    add_fit_options(search_cmd, search_flags, false);
    search_cmd->add_option("--family", search_families, "families to fit (default both)")
        ->check(CLI::Validator(family_check, "FAMILY"));
    search_cmd->add_option("--structure", search_structures,
                           "structure tags to fit (default all 14)")
        ->check(CLI::Validator(structure_check, "STRUCTURE"));
    search_cmd->add_option("--G", search_g, "component counts (default 1 2 3 4)");

    FitFlags impute_flags;
    std::string impute_model;
    auto* impute_cmd = app.add_subcommand("impute", "impute missing cells with a saved model");
    impute_cmd->add_option("--model", impute_model, "saved model file")->required();
    impute_cmd->add_option("--input", impute_flags.input, "input CSV")->required();
    impute_cmd->add_option("--out", impute_flags.out, "output file prefix")->required();
    impute_cmd->add_option("--na-token", impute_flags.na_tokens, "cell values treated as missing");

    std::string sim_design = "Sim1", sim_mechanism;
    int sim_n_per = 0;
    double sim_rate = 0.05;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a built-in simulation design");
    sim_cmd->add_option("--design", sim_design, "Sim1..Sim6")->required();
    sim_cmd->add_option("--n-per-component", sim_n_per, "rows per component (default 200)");
    sim_cmd->add_option("--mechanism", sim_mechanism, "optional missingness: MCAR, MAR1, MAR2");
    sim_cmd->add_option("--rate", sim_rate, "missingness rate (with --mechanism)");
    sim_cmd->add_option("--seed", sim_seed, "random seed");
    sim_cmd->add_option("--out", sim_out, "output file prefix")->required();

    FitFlags study_flags;
    std::string study_design = "Sim1";
    std::vector<std::string> study_mechanisms, study_families, study_structures;
    std::vector<double> study_rates;
    std::vector<int> study_g;
    int study_reps = 10;
    auto* study_cmd = app.add_subcommand("study", "replicated simulation study");
    study_cmd->add_option("--design", study_design, "Sim1..Sim6")->required();
    study_cmd->add_option("--mechanism", study_mechanisms, "mechanisms (default MCAR)");
    study_cmd->add_option("--rate", study_rates, "missingness rates (default 0.05)");
    study_cmd->add_option("--replications", study_reps, "replications per cell")
        ->check(CLI::PositiveNumber);
    study_cmd->add_option("--family", study_families, "families to fit (default design family)")
        ->check(CLI::Validator(family_check, "FAMILY"));
    study_cmd->add_option("--structure", study_structures,
                          "structures to fit (default design structure)")
        ->check(CLI::Validator(structure_check, "STRUCTURE"));
    study_cmd->add_option("--G", study_g, "component counts (default the true count)");
    study_cmd->add_option("--out", study_flags.out, "output file prefix")->required();
    study_cmd->add_option("--epsilon", study_flags.epsilon, "Aitken stopping threshold");
    study_cmd->add_option("--max-iter", study_flags.max_iter, "iteration cap");
    study_cmd->add_option("--starts", study_flags.n_starts, "number of EM starts");
    study_cmd->add_option("--seed", study_flags.seed, "random seed");

    std::string eval_a, eval_b;
    auto* eval_cmd = app.add_subcommand("evaluate", "adjusted Rand index of two label files");
    eval_cmd->add_option("--labels-a", eval_a, "first labels CSV")->required();
    eval_cmd->add_option("--labels-b", eval_b, "second labels CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(fit_cmd)) return cmd_fit(fit_flags);
        if (app.got_subcommand(search_cmd)) {
            return cmd_search(search_flags, search_families, search_structures, search_g);
        }
        if (app.got_subcommand(impute_cmd)) return cmd_impute(impute_model, impute_flags);
        if (app.got_subcommand(sim_cmd)) {
            return cmd_simulate(sim_design, sim_n_per, sim_mechanism, sim_rate, sim_seed, sim_out);
        }
        if (app.got_subcommand(study_cmd)) {
            return cmd_study(study_design, study_mechanisms, study_rates, study_reps, study_flags,
                             study_families, study_structures, study_g);
        }
        if (app.got_subcommand(eval_cmd)) return cmd_evaluate(eval_a, eval_b);
    } catch (const FitError& err) {
        std::fprintf(stderr, "error: numeric: %s\n", err.what());
        return kExitNumeric;
    } catch (const DegenerateComponentError& err) {
        std::fprintf(stderr, "error: numeric: %s\n", err.what());
        return kExitNumeric;
    } catch (const std::invalid_argument& err) {
        std::fprintf(stderr, "error: data: %s\n", err.what());
        return kExitData;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: numeric: %s\n", err.what());
        return kExitNumeric;
    }
    return kExitUsage;
}
