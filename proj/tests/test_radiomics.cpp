#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "helpers/masks.hpp"
#include "octorad/radiomics/features.hpp"
#include "octorad/radiomics/fractal.hpp"
#include "octorad/radiomics/geometry.hpp"
#include "octorad/radiomics/intensity.hpp"

using namespace octorad;
using namespace octorad::radiomics;

namespace {

// closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric method),
// independent of the library's eigensolver
std::array<double, 3> eig3_analytic(const std::array<std::array<double, 3>, 3>& A) {
    const double p1 = A[0][1] * A[0][1] + A[0][2] * A[0][2] + A[1][2] * A[1][2];
    const double q = (A[0][0] + A[1][1] + A[2][2]) / 3.0;
    const double p2 = (A[0][0] - q) * (A[0][0] - q) + (A[1][1] - q) * (A[1][1] - q) + (A[2][2] - q) * (A[2][2] - q) +
                      2.0 * p1;
    if (p2 <= 1e-30) return {q, q, q};
    const double p = std::sqrt(p2 / 6.0);
    std::array<std::array<double, 3>, 3> B;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) B[i][j] = (A[i][j] - (i == j ? q : 0.0)) / p;
    const double detB = B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
                        B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
                        B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
    double r = detB / 2.0;
    r = std::min(1.0, std::max(-1.0, r));
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    return {e1, e2, e3};  // descending
}

std::array<std::array<double, 3>, 3> covariance_bf(const seg::BinaryMask& m) {
    double n = 0.0;
    double mean[3] = {0, 0, 0};
    for (int z = 0; z < m.dims[2]; ++z)
        for (int y = 0; y < m.dims[1]; ++y)
            for (int x = 0; x < m.dims[0]; ++x)
                if (m.in[m.index(x, y, z)]) {
                    mean[0] += x * m.spacing[0];
                    mean[1] += y * m.spacing[1];
                    mean[2] += z * m.spacing[2];
                    n += 1.0;
                }
    for (double& v : mean) v /= n;
    std::array<std::array<double, 3>, 3> c{};
    for (int z = 0; z < m.dims[2]; ++z)
        for (int y = 0; y < m.dims[1]; ++y)
            for (int x = 0; x < m.dims[0]; ++x)
                if (m.in[m.index(x, y, z)]) {
                    const double d[3] = {x * m.spacing[0] - mean[0], y * m.spacing[1] - mean[1],
                                         z * m.spacing[2] - mean[2]};
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) c[i][j] += d[i] * d[j];
                }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[i][j] /= n;
    return c;
}

}  // namespace

TEST_CASE("eccentricities analytic cases") {
    auto [m0, e0] = eccentricities(1.0, 1.0, 1.0);  // sphere
    CHECK(m0 == 0.0);
    CHECK(e0 == 0.0);

    auto [m1, e1] = eccentricities(8.0, 4.0, 2.0);
    CHECK(m1 == doctest::Approx(std::sqrt(1.0 - 4.0 / 64.0)).epsilon(1e-12));  // 0.9682
    CHECK(m1 == doctest::Approx(0.9682).epsilon(1e-4));
    CHECK(e1 == doctest::Approx(std::sqrt(1.0 - 4.0 / 16.0)).epsilon(1e-12));  // 0.8660
    CHECK(e1 == doctest::Approx(0.8660).epsilon(1e-4));

    auto [m2, e2] = eccentricities(5.0, 5.0, 3.0);  // oblate
    CHECK(m2 == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(e2 == doctest::Approx(0.8).epsilon(1e-12));

    auto [m3, e3] = eccentricities(0.0, 0.0, 0.0);  // degenerate
    CHECK(m3 == 0.0);
    CHECK(e3 == 0.0);

    auto [m4, e4] = eccentricities(4.0, 3.0, 0.0);  // flat region stays inside [0,1)
    CHECK(m4 < 1.0);
    CHECK(e4 < 1.0);
    CHECK(m4 > 0.999999);

    CHECK_THROWS_AS(eccentricities(1.0, 2.0, 3.0), std::invalid_argument);
}

TEST_CASE("region geometry of an axis-aligned ellipsoid") {
    auto m = masks::ellipsoid({40, 40, 40}, {1, 1, 1}, {19.5, 19.5, 19.5}, {8.0, 4.0, 2.0});
    auto g = region_geometry(m);

    // principal directions align with the grid axes
    CHECK(std::abs(g.axis_directions[0][0]) > 0.999);
    CHECK(std::abs(g.axis_directions[1][1]) > 0.999);
    CHECK(std::abs(g.axis_directions[2][2]) > 0.999);
    CHECK(g.eigenvalues[0] > g.eigenvalues[1]);
    CHECK(g.eigenvalues[1] > g.eigenvalues[2]);
    CHECK(g.centroid_mm[0] == doctest::Approx(19.5).epsilon(0.01));

    // voxelization keeps the analytic eccentricities within a couple percent
    CHECK(g.meridional_eccentricity == doctest::Approx(0.9682).epsilon(0.02));
    CHECK(g.equatorial_eccentricity == doctest::Approx(0.8660).epsilon(0.02));

    // orthonormality
    for (int i = 0; i < 3; ++i) {
        double norm = 0.0;
        for (int a = 0; a < 3; ++a) norm += g.axis_directions[i][a] * g.axis_directions[i][a];
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    }
    double dot01 = 0.0;
    for (int a = 0; a < 3; ++a) dot01 += g.axis_directions[0][a] * g.axis_directions[1][a];
    CHECK(std::abs(dot01) < 1e-6);
}

TEST_CASE("single voxel region degenerates cleanly") {
    auto m = masks::make_mask({5, 5, 5}, {1, 1, 1}, [](int x, int y, int z) { return x == 2 && y == 2 && z == 2; });
    auto g = region_geometry(m);
    CHECK(g.eigenvalues[0] == 0.0);
    CHECK(g.eigenvalues[2] == 0.0);
    CHECK(g.meridional_eccentricity == 0.0);
    CHECK(g.equatorial_eccentricity == 0.0);
    CHECK(g.centroid_mm[0] == 2.0);

    auto empty = masks::make_mask({5, 5, 5}, {1, 1, 1}, [](int, int, int) { return false; });
    CHECK_THROWS_AS(region_geometry(empty), std::invalid_argument);
}

TEST_CASE("region geometry eigenvalues match the brute-force covariance oracle") {
    Rng rng(91);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = masks::random_blob({9, 8, 7}, rng, 0.4);
        if (m.count() < 4) continue;
        auto g = region_geometry(m);
        auto eig = eig3_analytic(covariance_bf(m));
        for (int i = 0; i < 3; ++i) CHECK(g.eigenvalues[i] == doctest::Approx(eig[i]).epsilon(1e-7));
    }
}

TEST_CASE("box counting: solid cube, plane, menger sponge") {
    auto cube = masks::solid_cube(64);
    auto rc = box_count_dimension(cube, {1, 2, 4, 8});
    CHECK(rc.dimension == doctest::Approx(3.0).epsilon(0.05 / 3.0));
    CHECK(rc.fit_r2 > 0.999);

    auto sheet = masks::plane_sheet(64);
    auto rp = box_count_dimension(sheet, {1, 2, 4, 8});
    CHECK(rp.dimension == doctest::Approx(2.0).epsilon(0.05 / 2.0));

    auto sponge = masks::menger_sponge(3);
    auto rs = box_count_dimension(sponge, {1, 3, 9});
    const double want = std::log(20.0) / std::log(3.0);
    CHECK(std::abs(rs.dimension - want) < 0.01);
    CHECK(rs.counts[0] == 8000);  // 20^3 surviving voxels
    CHECK(rs.counts[1] == 400);
    CHECK(rs.counts[2] == 20);
}

TEST_CASE("box counts are positive and nonincreasing over the default scales") {
    Rng rng(92);
    for (int trial = 0; trial < 10; ++trial) {
        auto blob = masks::ellipsoid({48, 48, 48}, {1, 1, 1},
                                     {24.0 + rng.uniform(-4, 4), 24.0 + rng.uniform(-4, 4), 24.0},
                                     {6.0 + rng.uniform(0, 8), 6.0 + rng.uniform(0, 6), 5.0 + rng.uniform(0, 4)});
        auto r = box_count_dimension(blob);
        for (std::size_t i = 0; i < r.counts.size(); ++i) {
            CHECK(r.counts[i] > 0);
            if (i) CHECK(r.counts[i] <= r.counts[i - 1]);
        }
        CHECK(r.dimension >= 0.0);
        CHECK(r.dimension <= 3.0 + 1e-9);
    }
}

TEST_CASE("box counting error paths") {
    auto cube = masks::solid_cube(8);
    CHECK_THROWS_AS(box_count_dimension(cube, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(box_count_dimension(cube, {0, 1, 2}), std::invalid_argument);
    auto empty = masks::make_mask({4, 4, 4}, {1, 1, 1}, [](int, int, int) { return false; });
    CHECK_THROWS_AS(box_count_dimension(empty, {1, 2, 4}), std::invalid_argument);
}

TEST_CASE("intensity statistics analytic cases") {
    std::vector<double> two_point;
    for (int i = 0; i < 100; ++i) two_point.push_back(i % 2 ? 1.0 : -1.0);
    auto s = intensity_stats(two_point, 8);
    CHECK(s.kurtosis_defined);
    CHECK(s.kurtosis == doctest::Approx(1.0).epsilon(1e-12));

    // one sample per bin center -> uniform histogram over 64 bins -> 6 bits
    std::vector<double> uniform;
    for (int b = 0; b < 64; ++b) uniform.push_back(b + 0.5);
    auto u = intensity_stats(uniform, 64);
    CHECK(u.entropy_bits == doctest::Approx(6.0).epsilon(1e-12));
    double hist_sum = 0.0;
    for (double p : u.histogram) hist_sum += p;
    CHECK(hist_sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.histogram_energy == doctest::Approx(1.0 / 64.0).epsilon(1e-12));

    // seeded standard normal: Pearson kurtosis near 3
    Rng rng(93);
    std::vector<double> normal;
    normal.reserve(100000);
    for (int i = 0; i < 100000; ++i) normal.push_back(rng.normal());
    auto nstats = intensity_stats(normal, 64);
    CHECK(nstats.kurtosis == doctest::Approx(3.0).epsilon(0.1 / 3.0));

    // constant sample: entropy 0, kurtosis undefined
    std::vector<double> constant(10, 2.5);
    auto c = intensity_stats(constant, 16);
    CHECK(!c.kurtosis_defined);
    CHECK(c.entropy_bits == 0.0);
    CHECK(c.histogram[0] == 1.0);

    CHECK(intensity_stats(uniform, 64).entropy_bits <= std::log2(64.0) + 1e-12);
}

TEST_CASE("default manifest has exactly 71 entries and extraction fills them all") {
    auto manifest = default_manifest();
    CHECK(manifest.size() == 71);

    Volume mask(32, 32, 32, VoxelType::I16);
    mask.spacing = {1, 1, 1};
    Volume ref(32, 32, 32, VoxelType::F32);
    Rng rng(94);
    for (int z = 0; z < 32; ++z)
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                const double r = std::sqrt((x - 16.0) * (x - 16.0) + (y - 16.0) * (y - 16.0) + (z - 16.0) * (z - 16.0));
                if (r < 3)
                    mask.at(x, y, z) = 1;
                else if (r < 6)
                    mask.at(x, y, z) = 4;
                else if (r < 9)
                    mask.at(x, y, z) = 2;
                ref.at(x, y, z) = 0.2 + 0.1 * mask.at(x, y, z) + 0.05 * rng.normal();
            }

    auto fv = extract_feature_vector(mask, ref, manifest);
    CHECK(fv.values.size() == 71);
    CHECK(fv.missing.size() == 71);
    for (auto flag : fv.missing) CHECK(flag == 0);

    // composition oracle: the geometric entries equal region_geometry outputs
    auto wt = seg::binarize(mask, {1, 2, 4});
    auto g = region_geometry(wt);
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (manifest[i].region == "WT" && manifest[i].quantity == "axis_len_1")
            CHECK(fv.values[i] == g.axis_lengths_mm[0]);
        if (manifest[i].region == "WT" && manifest[i].quantity == "centroid_y") CHECK(fv.values[i] == g.centroid_mm[1]);
        if (manifest[i].region == "WT" && manifest[i].quantity == "ecc_meridional")
            CHECK(fv.values[i] == g.meridional_eccentricity);
    }
}

TEST_CASE("all-background mask yields fill values and missing flags") {
    Volume mask(16, 16, 16, VoxelType::I16);
    Volume ref(16, 16, 16, VoxelType::F32);
    auto fv = extract_feature_vector(mask, ref, default_manifest());
    for (std::size_t i = 0; i < fv.values.size(); ++i) {
        CHECK(fv.values[i] == 0.0);
        CHECK(fv.missing[i] == 1);
    }
}

TEST_CASE("translation moves only the centroid; doubling the spacing doubles lengths") {
    Volume mask(48, 48, 48, VoxelType::I16);
    mask.spacing = {1, 1, 1};
    Volume ref(48, 48, 48, VoxelType::F32);
    auto blob = masks::ellipsoid({48, 48, 48}, {1, 1, 1}, {16.0, 14.0, 15.0}, {7.0, 5.0, 4.0});
    for (std::size_t i = 0; i < blob.in.size(); ++i) {
        mask.voxels[i] = blob.in[i] ? 4 : 0;
        ref.voxels[i] = blob.in[i] ? 0.8 : 0.1;
    }

    Volume shifted = mask;
    std::fill(shifted.voxels.begin(), shifted.voxels.end(), 0.0);
    Volume ref_shifted = ref;
    const int sx = 9, sy = 7, sz = 6;
    for (int z = 0; z < 48; ++z)
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x) {
                if (x + sx < 48 && y + sy < 48 && z + sz < 48) {
                    shifted.at(x + sx, y + sy, z + sz) = mask.at(x, y, z);
                    ref_shifted.at(x + sx, y + sy, z + sz) = ref.at(x, y, z);
                }
            }

    auto et_a = seg::binarize(mask, {4});
    auto et_b = seg::binarize(shifted, {4});
    auto ga = region_geometry(et_a);
    auto gb = region_geometry(et_b);
    CHECK(gb.centroid_mm[0] - ga.centroid_mm[0] == doctest::Approx(sx).epsilon(1e-9));
    CHECK(gb.centroid_mm[1] - ga.centroid_mm[1] == doctest::Approx(sy).epsilon(1e-9));
    CHECK(gb.centroid_mm[2] - ga.centroid_mm[2] == doctest::Approx(sz).epsilon(1e-9));
    for (int i = 0; i < 3; ++i) {
        CHECK(gb.axis_lengths_mm[i] == doctest::Approx(ga.axis_lengths_mm[i]).epsilon(1e-9));
        CHECK(gb.eigenvalues[i] == doctest::Approx(ga.eigenvalues[i]).epsilon(1e-9));
    }
    CHECK(gb.meridional_eccentricity == doctest::Approx(ga.meridional_eccentricity).epsilon(1e-9));

    // grid-aligned shift leaves the anchored box counts identical
    auto fa = box_count_dimension(et_a);
    auto fb = box_count_dimension(et_b);
    CHECK(fa.dimension == doctest::Approx(fb.dimension).epsilon(1e-12));

    // doubling the spacing doubles centroid and axis lengths
    auto et_c = et_a;
    et_c.spacing = {2, 2, 2};
    auto gc = region_geometry(et_c);
    for (int i = 0; i < 3; ++i)
        CHECK(gc.axis_lengths_mm[i] == doctest::Approx(2.0 * ga.axis_lengths_mm[i]).epsilon(1e-9));
    CHECK(gc.centroid_mm[0] == doctest::Approx(2.0 * ga.centroid_mm[0]).epsilon(1e-9));
}

TEST_CASE("grid mismatch is rejected") {
    Volume mask(8, 8, 8, VoxelType::I16);
    Volume ref(9, 8, 8, VoxelType::F32);
    CHECK_THROWS_AS(extract_feature_vector(mask, ref, default_manifest()), std::invalid_argument);
}
