#pragma once

#include <string>
#include <vector>

#include "octorad/io/volume.hpp"

namespace octorad::radiomics {

// One manifest entry: which quantity, on which区 region. The default manifest
// has 71 entries; alternatives can be loaded from JSON.
struct FeatureDef {
    std::string name;      // CSV column label
    std::string region;    // NCR | TC | WT | ET
    std::string quantity;  // axis_len_1.. , axis_dir_XY, centroid_x.., eigenvalue_1..,
                           // ecc_meridional, ecc_equatorial, fractal_dimension,
                           // kurtosis, entropy, hist_energy
};

using Manifest = std::vector<FeatureDef>;

Manifest default_manifest();
Manifest load_manifest(const std::string& json_path);

struct FeatureVector {
    std::vector<double> values;          // manifest order
    std::vector<std::uint8_t> missing;   // 1 where the region was empty (fill value used)
};

// Evaluates the manifest over the mask (labels {0,1,2,4}) and the reference
// intensity volume. Empty regions contribute the fill value 0 plus a missing
// flag so the vector length stays fixed.
FeatureVector extract_feature_vector(const Volume& mask, const Volume& reference, const Manifest& manifest,
                                     int histogram_bins = 64);

}  // namespace octorad::radiomics
