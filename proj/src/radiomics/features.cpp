#include "octorad/radiomics/features.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "octorad/radiomics/fractal.hpp"
#include "octorad/radiomics/geometry.hpp"
#include "octorad/radiomics/intensity.hpp"
#include "octorad/seg/metrics.hpp"

namespace octorad::radiomics {

namespace {

const std::map<std::string, std::vector<int>>& region_labels() {
    static const std::map<std::string, std::vector<int>> map = {
        {"NCR", {1}},
        {"TC", {1, 4}},
        {"WT", {1, 2, 4}},
        {"ET", {4}},
    };
    return map;
}

}  // namespace

Manifest default_manifest() {
    Manifest m;
    const char* axes = "xyz";
    for (const std::string region : {"NCR", "TC", "WT"}) {
        for (int i = 1; i <= 3; ++i)
            m.push_back({region + "_axis_len_" + std::to_string(i), region, "axis_len_" + std::to_string(i)});
        for (int i = 1; i <= 3; ++i)
            for (int a = 0; a < 3; ++a)
                m.push_back({region + "_axis_dir_" + std::to_string(i) + axes[a], region,
                             "axis_dir_" + std::to_string(i) + axes[a]});
        for (int a = 0; a < 3; ++a)
            m.push_back({region + "_centroid_" + axes[a], region, std::string("centroid_") + axes[a]});
        for (int i = 1; i <= 3; ++i)
            m.push_back({region + "_eigenvalue_" + std::to_string(i), region, "eigenvalue_" + std::to_string(i)});
        m.push_back({region + "_ecc_meridional", region, "ecc_meridional"});
        m.push_back({region + "_ecc_equatorial", region, "ecc_equatorial"});
    }
    for (const std::string region : {"ET", "NCR"})
        m.push_back({region + "_fractal_dimension", region, "fractal_dimension"});
    for (const std::string region : {"NCR", "TC", "WT"}) {
        m.push_back({region + "_kurtosis", region, "kurtosis"});
        m.push_back({region + "_entropy", region, "entropy"});
        m.push_back({region + "_hist_energy", region, "hist_energy"});
    }
    return m;
}

Manifest load_manifest(const std::string& json_path) {
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("load_manifest: cannot open " + json_path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_manifest: bad json: " + std::string(e.what()));
    }
    Manifest m;
    for (const auto& e : j) {
        FeatureDef d;
        d.name = e.at("name").get<std::string>();
        d.region = e.at("region").get<std::string>();
        d.quantity = e.at("quantity").get<std::string>();
        if (!region_labels().count(d.region))
            throw std::runtime_error("load_manifest: unknown region '" + d.region + "'");
        m.push_back(std::move(d));
    }
    if (m.empty()) throw std::runtime_error("load_manifest: empty manifest");
    return m;
}

FeatureVector extract_feature_vector(const Volume& mask, const Volume& reference, const Manifest& manifest,
                                     int histogram_bins) {
    if (mask.dims != reference.dims) throw std::invalid_argument("extract_feature_vector: grid mismatch");

    struct RegionData {
        bool empty = true;
        RegionGeometry geometry;
        bool have_fractal = false;
        double fractal = 0.0;
        bool have_intensity = false;
        IntensityStats intensity;
        seg::BinaryMask bin;
    };
    std::map<std::string, RegionData> cache;

    auto region_data = [&](const std::string& region) -> RegionData& {
        auto it = cache.find(region);
        if (it != cache.end()) return it->second;
        RegionData d;
        d.bin = seg::binarize(mask, region_labels().at(region));
        d.empty = d.bin.count() == 0;
        if (!d.empty) d.geometry = region_geometry(d.bin);
        cache[region] = std::move(d);
        return cache[region];
    };

    FeatureVector out;
    out.values.reserve(manifest.size());
    out.missing.reserve(manifest.size());

    for (const auto& def : manifest) {
        RegionData& d = region_data(def.region);
        if (d.empty) {
            out.values.push_back(0.0);  // declared fill value
            out.missing.push_back(1);
            continue;
        }

        double v = 0.0;
        const std::string& q = def.quantity;
        if (q.rfind("axis_len_", 0) == 0) {
            v = d.geometry.axis_lengths_mm[q.back() - '1'];
        } else if (q.rfind("axis_dir_", 0) == 0) {
            const int i = q[9] - '1';
            const int a = q[10] == 'x' ? 0 : q[10] == 'y' ? 1 : 2;
            v = d.geometry.axis_directions[i][a];
        } else if (q.rfind("centroid_", 0) == 0) {
            const int a = q.back() == 'x' ? 0 : q.back() == 'y' ? 1 : 2;
            v = d.geometry.centroid_mm[a];
        } else if (q.rfind("eigenvalue_", 0) == 0) {
            v = d.geometry.eigenvalues[q.back() - '1'];
        } else if (q == "ecc_meridional") {
            v = d.geometry.meridional_eccentricity;
        } else if (q == "ecc_equatorial") {
            v = d.geometry.equatorial_eccentricity;
        } else if (q == "fractal_dimension") {
            if (!d.have_fractal) {
                d.fractal = box_count_dimension(d.bin).dimension;
                d.have_fractal = true;
            }
            v = d.fractal;
        } else if (q == "kurtosis" || q == "entropy" || q == "hist_energy") {
            if (!d.have_intensity) {
                std::vector<double> samples;
                for (std::size_t i = 0; i < mask.size(); ++i)
                    if (d.bin.in[i]) samples.push_back(reference.voxels[i]);
                d.intensity = intensity_stats(samples, histogram_bins);
                d.have_intensity = true;
            }
            if (q == "kurtosis") {
                if (!d.intensity.kurtosis_defined) {
                    out.values.push_back(0.0);
                    out.missing.push_back(1);
                    continue;
                }
                v = d.intensity.kurtosis;
            } else if (q == "entropy") {
                v = d.intensity.entropy_bits;
            } else {
                v = d.intensity.histogram_energy;
            }
        } else {
            throw std::runtime_error("extract_feature_vector: unknown quantity '" + q + "'");
        }
        out.values.push_back(v);
        out.missing.push_back(0);
    }
    return out;
}

}  // namespace octorad::radiomics
