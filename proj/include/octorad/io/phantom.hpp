#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "octorad/io/dataset.hpp"

namespace octorad {

// Procedural stand-in for a multi-modal tumor cohort. Each case gets a head
// ellipsoid, nested tumor sub-regions (NCR inside TC inside WT), three
// modality volumes driven by per-tissue intensity transfers, a gene-expression
// row and survival days planted on two imaging factors plus three gene latents.
struct PhantomSpec {
    int grid = 64;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};

    double head_radius_frac = 0.44;
    double wt_radius_min_frac = 0.13;
    double wt_radius_max_frac = 0.23;
    double tc_frac_min = 0.55;
    double tc_frac_max = 0.78;
    double ncr_frac_min = 0.42;
    double ncr_frac_max = 0.62;
    double roughness_max = 0.35;  // NCR surface perturbation amplitude

    double noise_sigma = 0.05;
    double modulation_amp = 0.06;  // shared smooth multiplicative field

    int n_genes = 40;
    std::array<int, 3> planted_gene_cols{5, 17, 29};

    std::uint64_t seed = 1;

    // intensity per tissue: {brain, edema, enhancing, necrotic}
    std::map<std::string, std::array<double, 4>> transfer = {
        {"T1c", {0.50, 0.52, 0.95, 0.15}},
        {"Flair", {0.40, 0.90, 0.65, 0.30}},
        {"T2", {0.35, 0.70, 0.55, 0.95}},
    };

    // survival model coefficients (days)
    double survival_base = 640.0;
    double survival_wt_coeff = -420.0;
    double survival_rough_coeff = -200.0;
    std::array<double, 3> survival_gene_coeff{70.0, -60.0, 50.0};
    double survival_noise = 25.0;
};

Dataset generate_phantom_dataset(const PhantomSpec& spec, int n_cases);

}  // namespace octorad
