#include "octorad/radiomics/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace octorad::radiomics {

std::pair<double, double> eccentricities(double a, double b, double c) {
    if (a < b || b < c || c < 0) throw std::invalid_argument("eccentricities: axes must satisfy a >= b >= c >= 0");
    if (a <= 0) return {0.0, 0.0};
    auto ecc = [](double longer, double shorter) {
        const double r = shorter / longer;
        double e = std::sqrt(std::max(0.0, 1.0 - r * r));
        if (e >= 1.0) e = std::nextafter(1.0, 0.0);
        return e;
    };
    const double meridional = ecc(a, c);
    const double equatorial = b > 0 ? ecc(b, c) : 0.0;
    return {meridional, equatorial};
}

RegionGeometry region_geometry(const seg::BinaryMask& region) {
    const int X = region.dims[0], Y = region.dims[1], Z = region.dims[2];
    const auto& sp = region.spacing;

    double n = 0.0;
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    for (int z = 0; z < Z; ++z)
        for (int y = 0; y < Y; ++y)
            for (int x = 0; x < X; ++x) {
                if (!region.in[region.index(x, y, z)]) continue;
                mean[0] += x * sp[0];
                mean[1] += y * sp[1];
                mean[2] += z * sp[2];
                n += 1.0;
            }
    if (n == 0.0) throw std::invalid_argument("region_geometry: empty region");
    for (int a = 0; a < 3; ++a) mean[a] /= n;

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int z = 0; z < Z; ++z)
        for (int y = 0; y < Y; ++y)
            for (int x = 0; x < X; ++x) {
                if (!region.in[region.index(x, y, z)]) continue;
                const double d0 = x * sp[0] - mean[0];
                const double d1 = y * sp[1] - mean[1];
                const double d2 = z * sp[2] - mean[2];
                cov(0, 0) += d0 * d0;
                cov(0, 1) += d0 * d1;
                cov(0, 2) += d0 * d2;
                cov(1, 1) += d1 * d1;
                cov(1, 2) += d1 * d2;
                cov(2, 2) += d2 * d2;
            }
    cov(1, 0) = cov(0, 1);
    cov(2, 0) = cov(0, 2);
    cov(2, 1) = cov(1, 2);
    cov /= n;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("region_geometry: eigendecomposition failed");

    RegionGeometry g;
    g.centroid_mm = mean;
    // Eigen sorts ascending; we want descending
    for (int i = 0; i < 3; ++i) {
        const int src = 2 - i;
        g.eigenvalues[i] = std::max(0.0, solver.eigenvalues()(src));
        Eigen::Vector3d v = solver.eigenvectors().col(src);
        int dominant = 0;
        for (int a = 1; a < 3; ++a)
            if (std::abs(v(a)) > std::abs(v(dominant))) dominant = a;
        if (v(dominant) < 0) v = -v;
        for (int a = 0; a < 3; ++a) g.axis_directions[i][a] = v(a);
    }
    for (int i = 0; i < 3; ++i) g.axis_lengths_mm[i] = 4.0 * std::sqrt(g.eigenvalues[i]);

    auto [mer, eq] = eccentricities(g.axis_lengths_mm[0], g.axis_lengths_mm[1], g.axis_lengths_mm[2]);
    g.meridional_eccentricity = mer;
    g.equatorial_eccentricity = eq;
    return g;
}

}  // namespace octorad::radiomics
