#include "octorad/seg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace octorad::seg {

const std::vector<RegionSpec>& standard_regions() {
    static const std::vector<RegionSpec> regions = {
        {"ET", {4}},
        {"WT", {1, 2, 4}},
        {"TC", {1, 4}},
    };
    return regions;
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (auto v : in) n += v;
    return n;
}

BinaryMask binarize(const Volume& mask, const std::vector<int>& labels) {
    BinaryMask b;
    b.dims = mask.dims;
    b.spacing = mask.spacing;
    b.in.assign(mask.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const int v = static_cast<int>(mask.voxels[i]);
        for (int l : labels)
            if (v == l) {
                b.in[i] = 1;
                break;
            }
    }
    return b;
}

double dice(const BinaryMask& a, const BinaryMask& b) {
    if (a.dims != b.dims) throw std::invalid_argument("dice: grid mismatch");
    std::size_t na = 0, nb = 0, inter = 0;
    for (std::size_t i = 0; i < a.in.size(); ++i) {
        na += a.in[i];
        nb += b.in[i];
        inter += a.in[i] & b.in[i];
    }
    if (na + nb == 0) return 1.0;  // both empty
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

std::vector<std::array<int, 3>> surface_voxels(const BinaryMask& m) {
    std::vector<std::array<int, 3>> out;
    const int X = m.dims[0], Y = m.dims[1], Z = m.dims[2];
    auto inside = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= X || y >= Y || z >= Z) return false;
        return m.in[m.index(x, y, z)] != 0;
    };
    for (int z = 0; z < Z; ++z)
        for (int y = 0; y < Y; ++y)
            for (int x = 0; x < X; ++x) {
                if (!m.in[m.index(x, y, z)]) continue;
                if (!inside(x - 1, y, z) || !inside(x + 1, y, z) || !inside(x, y - 1, z) || !inside(x, y + 1, z) ||
                    !inside(x, y, z - 1) || !inside(x, y, z + 1))
                    out.push_back({x, y, z});
            }
    return out;
}

namespace {

double percentile_nearest_rank(std::vector<double>& values, double p) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[rank - 1];
}

std::vector<double> directed_distances(const std::vector<std::array<int, 3>>& from,
                                       const std::vector<std::array<int, 3>>& to,
                                       const std::array<double, 3>& spacing) {
    std::vector<double> out;
    out.reserve(from.size());
    for (const auto& a : from) {
        double best = std::numeric_limits<double>::max();
        for (const auto& b : to) {
            const double dx = (a[0] - b[0]) * spacing[0];
            const double dy = (a[1] - b[1]) * spacing[1];
            const double dz = (a[2] - b[2]) * spacing[2];
            const double d2 = dx * dx + dy * dy + dz * dz;
            if (d2 < best) best = d2;
        }
        out.push_back(std::sqrt(best));
    }
    return out;
}

}  // namespace

double hausdorff(const BinaryMask& a, const BinaryMask& b, double percentile) {
    if (a.dims != b.dims) throw std::invalid_argument("hausdorff: grid mismatch");
    if (percentile <= 0 || percentile > 100) throw std::invalid_argument("hausdorff: bad percentile");
    const auto sa = surface_voxels(a);
    const auto sb = surface_voxels(b);
    if (sa.empty() || sb.empty())
        throw std::invalid_argument("hausdorff: distance undefined for an empty voxel set");

    auto dab = directed_distances(sa, sb, a.spacing);
    auto dba = directed_distances(sb, sa, a.spacing);
    return std::max(percentile_nearest_rank(dab, percentile), percentile_nearest_rank(dba, percentile));
}

std::map<std::string, RegionScores> evaluate_regions(const Volume& pred, const Volume& truth) {
    if (pred.dims != truth.dims) throw std::invalid_argument("evaluate_regions: grid mismatch");
    std::map<std::string, RegionScores> out;
    for (const auto& region : standard_regions()) {
        const BinaryMask bp = binarize(pred, region.labels);
        const BinaryMask bt = binarize(truth, region.labels);
        RegionScores s;
        s.dice = dice(bp, bt);
        if (bp.count() > 0 && bt.count() > 0) {
            s.hd95 = hausdorff(bp, bt, 95.0);
            s.hd100 = hausdorff(bp, bt, 100.0);
            s.hd_defined = true;
        } else {
            s.hd95 = s.hd100 = std::numeric_limits<double>::quiet_NaN();
            s.hd_defined = false;
        }
        out[region.name] = s;
    }
    return out;
}

}  // namespace octorad::seg
