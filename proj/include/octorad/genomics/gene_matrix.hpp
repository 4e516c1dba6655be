#pragma once

#include <string>
#include <vector>

#include "octorad/genomics/matrix.hpp"

namespace octorad::genomics {

struct GeneExpressionMatrix {
    std::vector<std::string> patients;  // case ids, row order
    std::vector<std::string> genes;     // column order
    Matrix values;                      // expression ratios

    int find_patient(const std::string& id) const;
};

// CSV layout: header "id,<gene names...>", one row per case. Duplicate ids or
// gene names, ragged rows and non-numeric cells are rejected.
GeneExpressionMatrix load_gene_expression(const std::string& csv_path);
void save_gene_expression(const GeneExpressionMatrix& m, const std::string& csv_path);

}  // namespace octorad::genomics
