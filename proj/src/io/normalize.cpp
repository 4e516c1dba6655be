#include "octorad/io/normalize.hpp"

#include <cmath>
#include <stdexcept>

namespace octorad {

NormalizeResult normalize_intensity(const Volume& vol, const Volume* support_mask) {
    if (support_mask && !support_mask->same_grid(vol))
        throw std::invalid_argument("normalize_intensity: support mask grid mismatch");

    const std::size_t n = vol.size();
    auto in_support = [&](std::size_t i) {
        return support_mask ? support_mask->voxels[i] != 0.0 : vol.voxels[i] != 0.0;
    };

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (in_support(i)) {
            sum += vol.voxels[i];
            ++count;
        }
    if (count == 0) throw std::invalid_argument("normalize_intensity: empty support");

    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (in_support(i)) {
            const double d = vol.voxels[i] - mean;
            ss += d * d;
        }
    const double var = ss / static_cast<double>(count);

    NormalizeResult out;
    out.volume = vol;
    out.volume.dtype = VoxelType::F32;

    if (var == 0.0) {
        out.constant_support = true;
        for (std::size_t i = 0; i < n; ++i) out.volume.voxels[i] = in_support(i) ? 0.5 : 0.0;
        return out;
    }

    const double inv_std = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_support(i)) {
            out.volume.voxels[i] = 0.0;
            continue;
        }
        double z = (vol.voxels[i] - mean) * inv_std;
        if (z > 5.0) z = 5.0;
        if (z < -5.0) z = -5.0;
        out.volume.voxels[i] = (z + 5.0) / 10.0;
    }
    return out;
}

}  // namespace octorad
