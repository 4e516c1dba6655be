#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "octorad/core/rng.hpp"
#include "octorad/genomics/svm.hpp"
#include "octorad/io/dataset.hpp"
#include "octorad/io/normalize.hpp"
#include "octorad/io/phantom.hpp"
#include "octorad/io/volume.hpp"

using namespace octorad;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("octorad_io_" + name);
    fs::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("volume write produces sidecar plus raw payload of the right size") {
    Volume v(4, 4, 4, VoxelType::F32);
    for (std::size_t i = 0; i < v.size(); ++i) v.voxels[i] = static_cast<float>(0.25 * i);
    const std::string base = temp_dir("vol") + "/small";
    write_volume(v, base);
    CHECK(fs::file_size(base + ".raw") == 256);  // 64 voxels * 4 bytes

    Volume back = read_volume(base);
    CHECK(back.dims == v.dims);
    CHECK(back.dtype == VoxelType::F32);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.voxels[i] == v.voxels[i]);
}

TEST_CASE("volume round trip is bit-exact for f32 and i16 payloads") {
    Rng rng(5);
    const std::string base = temp_dir("vol") + "/rt";
    for (int trial = 0; trial < 100; ++trial) {
        Volume v(5, 6, 7, trial % 2 ? VoxelType::I16 : VoxelType::F32);
        v.spacing = {0.5, 1.0, 2.0};
        v.origin = {-3.0, 0.25, 7.5};
        for (auto& x : v.voxels)
            x = v.dtype == VoxelType::F32 ? static_cast<double>(static_cast<float>(rng.normal()))
                                          : static_cast<double>(rng.uniform_int(-500, 500));
        write_volume(v, base);
        Volume back = read_volume(base);
        CHECK(back.spacing == v.spacing);
        CHECK(back.origin == v.origin);
        std::size_t diffs = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (back.voxels[i] != v.voxels[i]) ++diffs;
        CHECK(diffs == 0);
    }
}

TEST_CASE("volume read rejects truncated payloads and unknown dtypes") {
    Volume v(4, 4, 4, VoxelType::F32);
    const std::string base = temp_dir("vol") + "/bad";
    write_volume(v, base);

    // truncate the raw payload
    fs::resize_file(base + ".raw", 200);
    CHECK_THROWS_WITH_AS(read_volume(base), doctest::Contains("size mismatch"), std::runtime_error);

    write_volume(v, base);
    // corrupt the dtype
    std::ifstream in(base + ".json");
    std::string sidecar((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = sidecar.find("f32");
    sidecar.replace(pos, 3, "f64");
    std::ofstream out(base + ".json", std::ios::trunc);
    out << sidecar;
    out.close();
    CHECK_THROWS_WITH_AS(read_volume(base), doctest::Contains("unknown dtype"), std::runtime_error);

    CHECK_THROWS_AS(read_volume(temp_dir("vol") + "/never_written"), std::runtime_error);
}

TEST_CASE("normalize_intensity") {
    Volume v(8, 8, 8, VoxelType::F32);
    // constant-1 foreground ball
    for (int z = 2; z < 6; ++z)
        for (int y = 2; y < 6; ++y)
            for (int x = 2; x < 6; ++x) v.at(x, y, z) = 1.0;
    auto res = normalize_intensity(v);
    CHECK(res.constant_support);
    for (int z = 0; z < 8; ++z)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                if (z >= 2 && z < 6 && y >= 2 && y < 6 && x >= 2 && x < 6)
                    CHECK(v.at(x, y, z) == 1.0);  // input untouched
                CHECK(res.volume.at(x, y, z) == ((z >= 2 && z < 6 && y >= 2 && y < 6 && x >= 2 && x < 6) ? 0.5 : 0.0));
            }

    // seeded Gaussian: output in [0,1], mean approx 0.5
    Rng rng(9);
    Volume g(16, 16, 16, VoxelType::F32);
    for (auto& x : g.voxels) x = 5.0 + 2.0 * rng.normal();
    auto gn = normalize_intensity(g);
    CHECK(!gn.constant_support);
    double mean = 0.0;
    for (double x : gn.volume.voxels) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
        mean += x;
    }
    mean /= static_cast<double>(gn.volume.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01 / 0.5));

    Volume empty(4, 4, 4, VoxelType::F32);
    CHECK_THROWS_AS(normalize_intensity(empty), std::invalid_argument);
}

TEST_CASE("phantom dataset: shape contract, nesting, determinism") {
    PhantomSpec spec;
    spec.grid = 32;
    spec.seed = 42;
    auto ds = generate_phantom_dataset(spec, 8);
    CHECK(ds.cases.size() == 8);
    CHECK(ds.gene_names.size() == static_cast<std::size_t>(spec.n_genes));

    for (const auto& c : ds.cases) {
        CHECK(c.modalities.size() == 3);
        CHECK(c.modalities.count("T1c"));
        CHECK(c.modalities.count("Flair"));
        CHECK(c.modalities.count("T2"));
        REQUIRE(c.mask.has_value());
        REQUIRE(c.survival.has_value());
        CHECK(c.gene_row.size() == static_cast<std::size_t>(spec.n_genes));
        CHECK(c.survival->days >= 30);

        // nesting: every ET/NCR voxel lies in TC, every TC voxel in WT (by labels)
        for (double v : c.mask->voxels) {
            const int l = static_cast<int>(v);
            CHECK((l == 0 || l == 1 || l == 2 || l == 4));
        }
        CHECK(c.oracle_factors.count("wt_radius_norm"));
        CHECK(c.oracle_factors.count("g1"));
    }

    auto ds2 = generate_phantom_dataset(spec, 8);
    for (std::size_t i = 0; i < ds.cases.size(); ++i) {
        CHECK(ds.cases[i].survival->days == ds2.cases[i].survival->days);
        std::size_t diffs = 0;
        const auto& va = ds.cases[i].modalities.at("T2").volume.voxels;
        const auto& vb = ds2.cases[i].modalities.at("T2").volume.voxels;
        for (std::size_t j = 0; j < va.size(); ++j)
            if (va[j] != vb[j]) ++diffs;
        CHECK(diffs == 0);
    }

    // different seed changes the data
    PhantomSpec other = spec;
    other.seed = 43;
    auto ds3 = generate_phantom_dataset(other, 1);
    CHECK(ds3.cases[0].survival->days != ds.cases[0].survival->days);
}

TEST_CASE("phantom dataset round-trips through disk") {
    PhantomSpec spec;
    spec.grid = 24;
    spec.seed = 7;
    auto ds = generate_phantom_dataset(spec, 3);
    const std::string root = temp_dir("dataset");
    save_dataset(ds, root);
    auto back = load_dataset(root);
    REQUIRE(back.cases.size() == 3);
    CHECK(back.gene_names == ds.gene_names);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.cases[i].id == ds.cases[i].id);
        CHECK(back.cases[i].survival->days == ds.cases[i].survival->days);
        CHECK(back.cases[i].modalities.at("T1c").provenance == "real");
        // volumes pass through an f32 cast on disk
        const auto& va = ds.cases[i].modalities.at("T1c").volume.voxels;
        const auto& vb = back.cases[i].modalities.at("T1c").volume.voxels;
        for (std::size_t j = 0; j < va.size(); ++j)
            CHECK(vb[j] == doctest::Approx(va[j]).epsilon(1e-6));
        CHECK(back.cases[i].gene_row.size() == ds.cases[i].gene_row.size());
        for (std::size_t j = 0; j < va.size(); ++j)
            if (ds.cases[i].mask->voxels[j] != back.cases[i].mask->voxels[j]) FAIL("mask voxel mismatch");
    }
}

TEST_CASE("planted survival model is recovered by SVR on the oracle factors") {
    PhantomSpec spec;
    spec.grid = 24;  // oracle factors do not depend on the grid
    spec.seed = 11;
    auto ds = generate_phantom_dataset(spec, 80);

    genomics::Matrix x(80, 5);
    std::vector<double> y;
    for (int r = 0; r < 80; ++r) {
        const auto& f = ds.cases[r].oracle_factors;
        x.at(r, 0) = f.at("wt_radius_norm");
        x.at(r, 1) = f.at("ncr_roughness_norm");
        x.at(r, 2) = f.at("g1");
        x.at(r, 3) = f.at("g2");
        x.at(r, 4) = f.at("g3");
        y.push_back(ds.cases[r].survival->days);
    }
    genomics::Standardizer stdz;
    stdz.fit_all(x);
    genomics::Matrix z = stdz.apply(x);

    genomics::SvmConfig cfg;
    cfg.C = 50.0;
    cfg.epsilon = 0.05;
    genomics::Svr svr;
    svr.fit(z, y, cfg);

    double mse = 0.0, var = 0.0, mean = 0.0;
    for (double v : y) mean += v;
    mean /= y.size();
    for (int r = 0; r < 80; ++r) {
        const double e = svr.predict(z.row_vec(r)) - y[r];
        mse += e * e;
        var += (y[r] - mean) * (y[r] - mean);
    }
    const double r2 = 1.0 - mse / var;
    CHECK(r2 >= 0.9);
}

TEST_CASE("phantom rejects bad specs") {
    PhantomSpec spec;
    spec.grid = 8;
    CHECK_THROWS_AS(generate_phantom_dataset(spec, 1), std::invalid_argument);
    PhantomSpec spec2;
    CHECK_THROWS_AS(generate_phantom_dataset(spec2, 0), std::invalid_argument);
}
