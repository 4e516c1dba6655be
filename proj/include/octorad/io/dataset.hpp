#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "octorad/io/volume.hpp"

namespace octorad {

struct SurvivalRecord {
    std::string id;
    int days = 0;
    double age = 0.0;
};

struct ModalityImage {
    Volume volume;
    std::string provenance = "real";  // real | synthesized
};

// One patient: modality volumes, optional label mask, optional gene row and
// survival record. All volumes in a case share dims and spacing.
struct CaseRecord {
    std::string id;
    std::map<std::string, ModalityImage> modalities;
    std::optional<Volume> mask;  // labels over {0,1,2,4}, I16
    std::vector<double> gene_row;
    std::optional<SurvivalRecord> survival;
    std::map<std::string, double> oracle_factors;  // planted latents, phantom datasets only

    void validate() const;  // shared-grid invariant
    std::vector<std::string> modality_names() const;
};

struct Dataset {
    std::vector<CaseRecord> cases;
    std::vector<std::string> gene_names;

    const CaseRecord* find_case(const std::string& id) const;
};

// Directory layout: manifest.json, genes.csv, survival.csv and one
// subdirectory per case holding sidecar+raw volume pairs.
void save_dataset(const Dataset& ds, const std::string& root);
Dataset load_dataset(const std::string& root);

}  // namespace octorad
