#pragma once

#include <vector>

namespace octorad::radiomics {

struct IntensityStats {
    double kurtosis = 0.0;        // Pearson convention: a normal gives 3
    bool kurtosis_defined = false;  // false for zero-variance samples
    double entropy_bits = 0.0;
    std::vector<double> histogram;  // normalized, sums to 1
    double histogram_energy = 0.0;  // sum of squared bin probabilities
};

// Histogram spans the sample min..max range. A constant sample occupies one
// bin (entropy 0) and leaves the kurtosis undefined.
IntensityStats intensity_stats(const std::vector<double>& samples, int bins = 64);

}  // namespace octorad::radiomics
