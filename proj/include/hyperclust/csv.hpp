#pragma once

#include <string>
#include <vector>

#include "hyperclust/missing_data.hpp"

namespace hyperclust {

// Parse a rectangular numeric CSV with a header row. Cells matching one of
// na_tokens (after trimming) are masked. Throws std::invalid_argument with
// the row/column position on malformed input.
MaskedDataset load_csv(const std::string& path,
                       const std::vector<std::string>& na_tokens = {"NA", "", "?"});

// Full-precision matrix writer; masked cells emit "NA". Writes are atomic
// (temp file + rename).
void write_matrix_csv(const std::string& path, const Matrix& data,
                      const std::vector<std::string>& column_names,
                      const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* mask = nullptr);

// Single "label" column, 1-based values.
void write_labels_csv(const std::string& path, const std::vector<int>& labels_zero_based);
std::vector<int> load_labels_csv(const std::string& path);  // returns 0-based

void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace hyperclust
