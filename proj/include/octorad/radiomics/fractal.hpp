#pragma once

#include <vector>

#include "octorad/seg/metrics.hpp"

namespace octorad::radiomics {

struct FractalResult {
    double dimension = 0.0;
    std::vector<int> scales;            // box edge lengths in voxels, ascending
    std::vector<std::size_t> counts;    // occupied boxes per scale
    double fit_r2 = 0.0;                // goodness of the log-log fit
};

std::vector<int> default_box_scales();  // {1,2,4,8,16}

// N(s) = number of s^3 grid boxes (anchored at the mask bounding-box corner)
// that intersect the mask; dimension is the least-squares slope of
// log N(s) against log(1/s). Needs a nonempty mask and at least 3 scales.
FractalResult box_count_dimension(const seg::BinaryMask& mask, std::vector<int> scales = default_box_scales());

}  // namespace octorad::radiomics
