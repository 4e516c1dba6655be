#include "octorad/radiomics/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace octorad::radiomics {

std::vector<int> default_box_scales() { return {1, 2, 4, 8, 16}; }

FractalResult box_count_dimension(const seg::BinaryMask& mask, std::vector<int> scales) {
    if (scales.size() < 3) throw std::invalid_argument("box_count_dimension: need at least 3 scales");
    for (int s : scales)
        if (s < 1) throw std::invalid_argument("box_count_dimension: scales must be >= 1 voxel");
    std::sort(scales.begin(), scales.end());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    if (scales.size() < 3) throw std::invalid_argument("box_count_dimension: need at least 3 distinct scales");

    const int X = mask.dims[0], Y = mask.dims[1], Z = mask.dims[2];
    int min[3] = {X, Y, Z}, max[3] = {-1, -1, -1};
    for (int z = 0; z < Z; ++z)
        for (int y = 0; y < Y; ++y)
            for (int x = 0; x < X; ++x) {
                if (!mask.in[mask.index(x, y, z)]) continue;
                min[0] = std::min(min[0], x);
                min[1] = std::min(min[1], y);
                min[2] = std::min(min[2], z);
                max[0] = std::max(max[0], x);
                max[1] = std::max(max[1], y);
                max[2] = std::max(max[2], z);
            }
    if (max[0] < 0) throw std::invalid_argument("box_count_dimension: empty mask");

    FractalResult res;
    res.scales = scales;
    res.counts.reserve(scales.size());

    for (int s : scales) {
        const int bx = (max[0] - min[0]) / s + 1;
        const int by = (max[1] - min[1]) / s + 1;
        const int bz = (max[2] - min[2]) / s + 1;
        std::vector<std::uint8_t> occupied(static_cast<std::size_t>(bx) * by * bz, 0);
        for (int z = min[2]; z <= max[2]; ++z)
            for (int y = min[1]; y <= max[1]; ++y)
                for (int x = min[0]; x <= max[0]; ++x) {
                    if (!mask.in[mask.index(x, y, z)]) continue;
                    const std::size_t b = (static_cast<std::size_t>((z - min[2]) / s) * by + (y - min[1]) / s) * bx +
                                          (x - min[0]) / s;
                    occupied[b] = 1;
                }
        std::size_t count = 0;
        for (auto v : occupied) count += v;
        res.counts.push_back(count);
    }

    // least-squares slope of log N against log(1/s)
    const std::size_t m = scales.size();
    double tbar = 0.0, ybar = 0.0;
    std::vector<double> t(m), yv(m);
    for (std::size_t i = 0; i < m; ++i) {
        t[i] = -std::log(static_cast<double>(scales[i]));
        yv[i] = std::log(static_cast<double>(res.counts[i]));
        tbar += t[i];
        ybar += yv[i];
    }
    tbar /= static_cast<double>(m);
    ybar /= static_cast<double>(m);
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        stt += (t[i] - tbar) * (t[i] - tbar);
        sty += (t[i] - tbar) * (yv[i] - ybar);
        syy += (yv[i] - ybar) * (yv[i] - ybar);
    }
    res.dimension = sty / stt;
    res.fit_r2 = syy > 0 ? (sty * sty) / (stt * syy) : 1.0;
    return res;
}

}  // namespace octorad::radiomics
