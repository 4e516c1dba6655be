#pragma once

#include <string>
#include <vector>

#include "octorad/genomics/gene_matrix.hpp"
#include "octorad/genomics/matrix.hpp"

namespace octorad::genomics {

// Named feature table keyed by case id (radiomic vectors, clinical columns).
struct FeatureTable {
    std::vector<std::string> ids;
    std::vector<std::string> columns;
    Matrix values;

    int find_id(const std::string& id) const;
};

FeatureTable load_feature_table(const std::string& csv_path);
void save_feature_table(const FeatureTable& t, const std::string& csv_path);

// Column-concatenated radiomic + genomic + clinical matrix with provenance
// tags. Cases missing any source are dropped and reported.
struct FusedFeatureSet {
    std::vector<std::string> case_ids;
    std::vector<std::string> columns;
    std::vector<std::string> provenance;  // radiomic | genomic | clinical per column
    Matrix values;                        // raw, unstandardized
    std::vector<std::string> dropped_ids;

    std::vector<int> columns_with_provenance(const std::string& tag) const;
};

FusedFeatureSet fuse(const FeatureTable& radiomic, const GeneExpressionMatrix& genomic,
                     const FeatureTable& clinical);

}  // namespace octorad::genomics
