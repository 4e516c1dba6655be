#include "octorad/genomics/gene_matrix.hpp"

#include <set>
#include <stdexcept>

#include "octorad/core/table.hpp"

namespace octorad::genomics {

int GeneExpressionMatrix::find_patient(const std::string& id) const {
    for (std::size_t i = 0; i < patients.size(); ++i)
        if (patients[i] == id) return static_cast<int>(i);
    return -1;
}

GeneExpressionMatrix load_gene_expression(const std::string& csv_path) {
    const CsvData csv = read_csv(csv_path);
    if (csv.header.size() < 2 || csv.header[0] != "id")
        throw std::runtime_error("gene expression: header must start with 'id' followed by gene names");

    GeneExpressionMatrix m;
    m.genes.assign(csv.header.begin() + 1, csv.header.end());

    std::set<std::string> seen_genes;
    for (const auto& g : m.genes)
        if (!seen_genes.insert(g).second)
            throw std::runtime_error("gene expression: duplicate gene column '" + g + "'");

    m.values = Matrix(static_cast<int>(csv.rows.size()), static_cast<int>(m.genes.size()));
    std::set<std::string> seen_ids;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        if (row.size() != csv.header.size())
            throw std::runtime_error("gene expression: row " + std::to_string(r + 1) + " has " +
                                     std::to_string(row.size()) + " cells, expected " +
                                     std::to_string(csv.header.size()));
        if (!seen_ids.insert(row[0]).second)
            throw std::runtime_error("gene expression: duplicate case id '" + row[0] + "'");
        m.patients.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            try {
                std::size_t used = 0;
                const double val = std::stod(row[c], &used);
                if (used != row[c].size()) throw std::invalid_argument("trailing junk");
                m.values.at(static_cast<int>(r), static_cast<int>(c - 1)) = val;
            } catch (const std::exception&) {
                throw std::runtime_error("gene expression: non-numeric cell '" + row[c] + "' at row " +
                                         std::to_string(r + 1) + ", column '" + csv.header[c] + "'");
            }
        }
    }
    return m;
}

void save_gene_expression(const GeneExpressionMatrix& m, const std::string& csv_path) {
    std::vector<std::string> header{"id"};
    header.insert(header.end(), m.genes.begin(), m.genes.end());
    Table t(header);
    for (std::size_t r = 0; r < m.patients.size(); ++r) {
        auto& row = t.add_row();
        row.str(m.patients[r]);
        for (int c = 0; c < m.values.cols; ++c) row.num(m.values.at(static_cast<int>(r), c), 17);
    }
    t.write_csv(csv_path);
}

}  // namespace octorad::genomics
