#pragma once

#include <array>
#include <utility>

#include "octorad/seg/metrics.hpp"

namespace octorad::radiomics {

// Ellipsoid-style shape description of a voxel region: principal axes from
// the eigendecomposition of the voxel-coordinate covariance (in mm).
struct RegionGeometry {
    std::array<double, 3> centroid_mm{};
    std::array<double, 3> eigenvalues{};      // sorted descending, mm^2
    std::array<double, 3> axis_lengths_mm{};  // 4*sqrt(eigenvalue), descending
    // rows are unit vectors matching eigenvalues; sign fixed so the largest
    // magnitude component of each vector is positive
    std::array<std::array<double, 3>, 3> axis_directions{};
    double meridional_eccentricity = 0.0;
    double equatorial_eccentricity = 0.0;
};

// Throws std::invalid_argument on an empty region. Degenerate (planar or
// linear) regions are allowed; trailing eigenvalues come out as 0.
RegionGeometry region_geometry(const seg::BinaryMask& region);

// a >= b >= c >= 0 are the sorted axis lengths; the polar axis is the
// shortest one. a == 0 degenerates to (0,0). Values are capped below 1 so a
// flat region keeps the [0,1) contract.
std::pair<double, double> eccentricities(double a, double b, double c);

}  // namespace octorad::radiomics
