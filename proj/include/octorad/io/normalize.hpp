#pragma once

#include "octorad/io/volume.hpp"

namespace octorad {

struct NormalizeResult {
    Volume volume;
    bool constant_support = false;  // degenerate input, output is all 0.5 on support
};

// Z-scores intensities over the support (nonzero voxels by default, or the
// given mask), clips to [-5,5] and rescales to [0,1]. Background stays 0.
NormalizeResult normalize_intensity(const Volume& vol, const Volume* support_mask = nullptr);

}  // namespace octorad
