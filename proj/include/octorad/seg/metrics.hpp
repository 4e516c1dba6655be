#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "octorad/io/volume.hpp"

namespace octorad::seg {

// ET/TC/WT region compositions of a BraTS-style mask.
struct RegionSpec {
    std::string name;
    std::vector<int> labels;
};

const std::vector<RegionSpec>& standard_regions();  // ET={4}, WT={1,2,4}, TC={1,4}

struct BinaryMask {
    std::array<int, 3> dims;
    std::array<double, 3> spacing;
    std::vector<std::uint8_t> in;  // 1 = inside

    std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * dims[1] + y) * dims[0] + x;
    }
    std::size_t count() const;
};

BinaryMask binarize(const Volume& mask, const std::vector<int>& labels);

// 2|A∩B| / (|A|+|B|); both empty -> 1, one empty -> 0
double dice(const BinaryMask& a, const BinaryMask& b);

// Symmetric directed-distance percentile over 6-connectivity surface voxels,
// in millimeters. Throws on an empty set.
double hausdorff(const BinaryMask& a, const BinaryMask& b, double percentile);

std::vector<std::array<int, 3>> surface_voxels(const BinaryMask& m);

struct RegionScores {
    double dice = 0.0;
    double hd95 = 0.0;
    double hd100 = 0.0;
    bool hd_defined = false;  // false when either region is empty
};

// Binarizes per region then scores; one entry per standard region.
std::map<std::string, RegionScores> evaluate_regions(const Volume& pred, const Volume& truth);

}  // namespace octorad::seg
