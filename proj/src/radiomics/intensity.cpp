#include "octorad/radiomics/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace octorad::radiomics {

IntensityStats intensity_stats(const std::vector<double>& samples, int bins) {
    if (samples.empty()) throw std::invalid_argument("intensity_stats: no samples");
    if (bins < 1) throw std::invalid_argument("intensity_stats: bins must be >= 1");

    IntensityStats out;
    const double n = static_cast<double>(samples.size());

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    if (m2 > 0 && samples.size() >= 2) {
        out.kurtosis = m4 / (m2 * m2);
        out.kurtosis_defined = true;
    } else {
        out.kurtosis = std::numeric_limits<double>::quiet_NaN();
        out.kurtosis_defined = false;
    }

    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it, hi = *hi_it;
    out.histogram.assign(static_cast<std::size_t>(bins), 0.0);
    if (hi == lo) {
        out.histogram[0] = 1.0;
    } else {
        const double scale = static_cast<double>(bins) / (hi - lo);
        for (double v : samples) {
            int b = static_cast<int>((v - lo) * scale);
            if (b >= bins) b = bins - 1;
            if (b < 0) b = 0;
            out.histogram[b] += 1.0;
        }
        for (double& p : out.histogram) p /= n;
    }

    out.entropy_bits = 0.0;
    out.histogram_energy = 0.0;
    for (double p : out.histogram) {
        if (p > 0) out.entropy_bits -= p * std::log2(p);
        out.histogram_energy += p * p;
    }
    return out;
}

}  // namespace octorad::radiomics
