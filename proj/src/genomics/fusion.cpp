#include "octorad/genomics/fusion.hpp"

#include <array>
#include <stdexcept>

#include "octorad/core/table.hpp"

namespace octorad::genomics {

int FeatureTable::find_id(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return static_cast<int>(i);
    return -1;
}

FeatureTable load_feature_table(const std::string& csv_path) {
    const CsvData csv = read_csv(csv_path);
    if (csv.header.size() < 2 || csv.header[0] != "id")
        throw std::runtime_error("feature table: header must start with 'id'");
    FeatureTable t;
    t.columns.assign(csv.header.begin() + 1, csv.header.end());
    t.values = Matrix(static_cast<int>(csv.rows.size()), static_cast<int>(t.columns.size()));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        if (row.size() != csv.header.size())
            throw std::runtime_error("feature table: ragged row " + std::to_string(r + 1));
        t.ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            try {
                t.values.at(static_cast<int>(r), static_cast<int>(c - 1)) = std::stod(row[c]);
            } catch (const std::exception&) {
                throw std::runtime_error("feature table: non-numeric cell '" + row[c] + "' in row " +
                                         std::to_string(r + 1));
            }
        }
    }
    return t;
}

void save_feature_table(const FeatureTable& t, const std::string& csv_path) {
    std::vector<std::string> header{"id"};
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    Table out(header);
    for (std::size_t r = 0; r < t.ids.size(); ++r) {
        auto& row = out.add_row();
        row.str(t.ids[r]);
        for (int c = 0; c < t.values.cols; ++c) row.num(t.values.at(static_cast<int>(r), c), 17);
    }
    out.write_csv(csv_path);
}

std::vector<int> FusedFeatureSet::columns_with_provenance(const std::string& tag) const {
    std::vector<int> out;
    for (std::size_t c = 0; c < provenance.size(); ++c)
        if (provenance[c] == tag) out.push_back(static_cast<int>(c));
    return out;
}

FusedFeatureSet fuse(const FeatureTable& radiomic, const GeneExpressionMatrix& genomic,
                     const FeatureTable& clinical) {
    FusedFeatureSet out;
    out.columns = radiomic.columns;
    out.provenance.assign(radiomic.columns.size(), "radiomic");
    for (const auto& g : genomic.genes) {
        out.columns.push_back(g);
        out.provenance.push_back("genomic");
    }
    for (const auto& c : clinical.columns) {
        out.columns.push_back(c);
        out.provenance.push_back("clinical");
    }

    std::vector<std::array<int, 3>> rows;  // per kept case: row in each source
    for (std::size_t i = 0; i < radiomic.ids.size(); ++i) {
        const std::string& id = radiomic.ids[i];
        const int gr = genomic.find_patient(id);
        const int cr = clinical.find_id(id);
        if (gr < 0 || cr < 0) {
            out.dropped_ids.push_back(id);
            continue;
        }
        out.case_ids.push_back(id);
        rows.push_back({static_cast<int>(i), gr, cr});
    }
    // cases present only in the other sources are dropped as well
    for (const auto& id : genomic.patients)
        if (radiomic.find_id(id) < 0) out.dropped_ids.push_back(id);

    if (out.case_ids.empty()) throw std::runtime_error("fuse: no case ids shared by all sources");

    out.values = Matrix(static_cast<int>(out.case_ids.size()), static_cast<int>(out.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        int c = 0;
        for (int i = 0; i < radiomic.values.cols; ++i) out.values.at(static_cast<int>(r), c++) = radiomic.values.at(rows[r][0], i);
        for (int i = 0; i < genomic.values.cols; ++i) out.values.at(static_cast<int>(r), c++) = genomic.values.at(rows[r][1], i);
        for (int i = 0; i < clinical.values.cols; ++i) out.values.at(static_cast<int>(r), c++) = clinical.values.at(rows[r][2], i);
    }
    return out;
}

}  // namespace octorad::genomics
