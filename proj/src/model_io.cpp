#include "hyperclust/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hyperclust/csv.hpp"

namespace hyperclust {

namespace {

constexpr const char* kHeader = "hyperclust-model v1";

void put_vector(std::ostringstream& out, const char* key, const Vector& v) {
    out << key;
    for (int i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
    out << '\n';
}

Vector parse_vector(std::istringstream& line, int expect) {
    Vector v(expect);
    for (int i = 0; i < expect; ++i) {
        if (!(line >> v[i])) throw std::invalid_argument("model file: truncated vector");
    }
    return v;
}

}  // namespace

void save_model(const std::string& path, const MixtureModel& model,
                const std::optional<ColumnScaling>& scaling) {
    validate(model);
    std::ostringstream out;
    out << kHeader << '\n';
    out << "family " << to_string(model.family) << '\n';
    out << "structure " << to_string(model.structure) << '\n';
    out << "p " << model.dim() << '\n';
    out << "G " << model.groups() << '\n';
    if (scaling) {
        put_vector(out, "scale_mean", scaling->mean);
        put_vector(out, "scale_sd", scaling->sd);
    }
    for (int g = 0; g < model.groups(); ++g) {
        const Component& c = model.components[g];
        out << "component " << (g + 1) << '\n';
        out << "weight " << format_double(model.weights[g]) << '\n';
        if (model.family == Family::Mghd) {
            out << "lambda " << format_double(c.lambda) << '\n';
            out << "omega " << format_double(c.omega) << '\n';
        } else {
            out << "dof " << format_double(c.dof) << '\n';
        }
        put_vector(out, "mu", c.mu);
        put_vector(out, "beta", c.beta);
        out << "sigma\n";
        for (int i = 0; i < c.sigma.rows(); ++i) {
            for (int j = 0; j < c.sigma.cols(); ++j) {
                if (j) out << ' ';
                out << format_double(c.sigma(i, j));
            }
            out << '\n';
        }
    }
    write_text_atomic(path, out.str());
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_model: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw std::invalid_argument("load_model: '" + path + "' is not a " +
                                    std::string(kHeader) + " file");
    }

    SavedModel out;
    int p = -1, G = -1;
    Vector scale_mean, scale_sd;
    bool have_mean = false, have_sd = false;
    int current = -1;

    auto need_component = [&]() -> Component& {
        if (current < 0 || current >= G) {
            throw std::invalid_argument("load_model: field outside a component block");
        }
        return out.model.components[current];
    };

    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key.empty()) continue;
        if (key == "family") {
            std::string v;
            ls >> v;
            out.model.family = parse_family(v);
        } else if (key == "structure") {
            std::string v;
            ls >> v;
            out.model.structure = parse_structure(v);
        } else if (key == "p") {
            ls >> p;
        } else if (key == "G") {
            ls >> G;
            if (G < 1 || p < 1) throw std::invalid_argument("load_model: bad p/G header");
            out.model.weights.assign(G, 0.0);
            out.model.components.assign(G, Component{});
        } else if (key == "scale_mean") {
            scale_mean = parse_vector(ls, p);
            have_mean = true;
        } else if (key == "scale_sd") {
            scale_sd = parse_vector(ls, p);
            have_sd = true;
        } else if (key == "component") {
            int idx = 0;
            ls >> idx;
            current = idx - 1;
            if (current < 0 || current >= G) {
                throw std::invalid_argument("load_model: component index out of range");
            }
        } else if (key == "weight") {
            ls >> out.model.weights[current < 0 ? 0 : current];
        } else if (key == "lambda") {
            ls >> need_component().lambda;
        } else if (key == "omega") {
            ls >> need_component().omega;
        } else if (key == "dof") {
            ls >> need_component().dof;
        } else if (key == "mu") {
            need_component().mu = parse_vector(ls, p);
        } else if (key == "beta") {
            need_component().beta = parse_vector(ls, p);
        } else if (key == "sigma") {
            Component& c = need_component();
            c.sigma.resize(p, p);
            for (int i = 0; i < p; ++i) {
                if (!std::getline(in, line)) {
                    throw std::invalid_argument("load_model: truncated sigma block");
                }
                std::istringstream row(line);
                for (int j = 0; j < p; ++j) {
                    if (!(row >> c.sigma(i, j))) {
                        throw std::invalid_argument("load_model: truncated sigma row");
                    }
                }
            }
        } else {
            throw std::invalid_argument("load_model: unknown key '" + key + "'");
        }
    }
    if (have_mean != have_sd) {
        throw std::invalid_argument("load_model: incomplete scaling block");
    }
    if (have_mean) out.scaling = ColumnScaling{scale_mean, scale_sd};
    validate(out.model);
    return out;
}

}  // namespace hyperclust
