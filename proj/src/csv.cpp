#include "hyperclust/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyperclust {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

MaskedDataset load_csv(const std::string& path, const std::vector<std::string>& na_tokens) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_csv: empty file '" + path + "'");
    const std::vector<std::string> header = split_csv_line(line);
    const int p = static_cast<int>(header.size());
    if (p == 0) throw std::invalid_argument("load_csv: empty header in '" + path + "'");

    auto is_na = [&](const std::string& cell) {
        for (const auto& tok : na_tokens) {
            if (cell == tok) return true;
        }
        return false;
    };

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> masks;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != p) {
            throw std::invalid_argument("load_csv: row " + std::to_string(lineno) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(p));
        }
        std::vector<double> row(p, 0.0);
        std::vector<bool> mask(p, false);
        for (int j = 0; j < p; ++j) {
            if (is_na(cells[j])) {
                mask[j] = true;
                continue;
            }
            try {
                size_t used = 0;
                row[j] = std::stod(cells[j], &used);
                if (used != cells[j].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw std::invalid_argument("load_csv: non-numeric cell '" + cells[j] +
                                            "' at row " + std::to_string(lineno) + ", column " +
                                            std::to_string(j + 1));
            }
        }
        rows.push_back(std::move(row));
        masks.push_back(std::move(mask));
    }
    if (rows.empty()) throw std::invalid_argument("load_csv: no data rows in '" + path + "'");

    Matrix data(rows.size(), p);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(rows.size(), p);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < p; ++j) {
            data(i, j) = rows[i][j];
            mask(i, j) = masks[i][j];
        }
    }
    return make_masked(data, mask, header);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("rename to '" + path + "' failed: " + std::strerror(errno));
    }
}

void write_matrix_csv(const std::string& path, const Matrix& data,
                      const std::vector<std::string>& column_names,
                      const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* mask) {
    std::ostringstream out;
    for (size_t j = 0; j < column_names.size(); ++j) {
        if (j) out << ',';
        out << column_names[j];
    }
    out << '\n';
    for (int i = 0; i < data.rows(); ++i) {
        for (int j = 0; j < data.cols(); ++j) {
            if (j) out << ',';
            if (mask && (*mask)(i, j)) {
                out << "NA";
            } else {
                out << format_double(data(i, j));
            }
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels_zero_based) {
    std::ostringstream out;
    out << "label\n";
    for (int v : labels_zero_based) out << (v + 1) << '\n';
    write_text_atomic(path, out.str());
}

std::vector<int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_labels_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_labels_csv: empty file");
    std::vector<int> labels;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string cell = trim(line);
        if (cell.empty()) continue;
        try {
            labels.push_back(std::stoi(cell) - 1);
        } catch (const std::exception&) {
            throw std::invalid_argument("load_labels_csv: bad label '" + cell + "' at line " +
                                        std::to_string(lineno));
        }
    }
    if (labels.empty()) throw std::invalid_argument("load_labels_csv: no labels in '" + path + "'");
    return labels;
}

}  // namespace hyperclust
