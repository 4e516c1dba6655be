#include "octorad/io/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "octorad/core/table.hpp"

namespace octorad {

namespace fs = std::filesystem;
using nlohmann::json;

void CaseRecord::validate() const {
    const Volume* ref = nullptr;
    for (const auto& [name, img] : modalities) {
        if (!ref) {
            ref = &img.volume;
            continue;
        }
        if (!img.volume.same_grid(*ref))
            throw std::runtime_error("case " + id + ": modality '" + name + "' grid differs");
    }
    if (mask && ref && !mask->same_grid(*ref))
        throw std::runtime_error("case " + id + ": mask grid differs from modalities");
    if (mask) {
        for (double v : mask->voxels) {
            const int label = static_cast<int>(v);
            if (label != 0 && label != 1 && label != 2 && label != 4)
                throw std::runtime_error("case " + id + ": mask label " + std::to_string(label) +
                                         " outside {0,1,2,4}");
        }
    }
}

std::vector<std::string> CaseRecord::modality_names() const {
    std::vector<std::string> names;
    names.reserve(modalities.size());
    for (const auto& [name, img] : modalities) names.push_back(name);
    return names;
}

const CaseRecord* Dataset::find_case(const std::string& id) const {
    for (const auto& c : cases)
        if (c.id == id) return &c;
    return nullptr;
}

void save_dataset(const Dataset& ds, const std::string& root) {
    fs::create_directories(root);

    json manifest;
    manifest["cases"] = json::array();

    for (const auto& c : ds.cases) {
        c.validate();
        fs::create_directories(fs::path(root) / c.id);
        json jc;
        jc["id"] = c.id;
        json mods = json::object();
        for (const auto& [name, img] : c.modalities) {
            const std::string rel = c.id + "/" + name;
            write_volume(img.volume, (fs::path(root) / rel).string());
            mods[name] = {{"path", rel}, {"provenance", img.provenance}};
        }
        jc["modalities"] = mods;
        if (c.mask) {
            const std::string rel = c.id + "/mask";
            write_volume(*c.mask, (fs::path(root) / rel).string());
            jc["mask"] = rel;
        }
        if (c.survival) {
            jc["survival_days"] = c.survival->days;
            jc["age"] = c.survival->age;
        }
        if (!c.oracle_factors.empty()) jc["oracle_factors"] = c.oracle_factors;
        manifest["cases"].push_back(jc);
    }

    if (!ds.gene_names.empty()) {
        manifest["genes_csv"] = "genes.csv";
        std::vector<std::string> header{"id"};
        header.insert(header.end(), ds.gene_names.begin(), ds.gene_names.end());
        Table t(header);
        for (const auto& c : ds.cases) {
            auto& row = t.add_row();
            row.str(c.id);
            for (double v : c.gene_row) row.num(v, 17);
        }
        t.write_csv((fs::path(root) / "genes.csv").string());
    }

    {
        manifest["survival_csv"] = "survival.csv";
        Table t({"id", "days", "age"});
        for (const auto& c : ds.cases)
            if (c.survival) t.add_row().str(c.id).integer(c.survival->days).num(c.survival->age, 17);
        t.write_csv((fs::path(root) / "survival.csv").string());
    }

    std::ofstream mf(fs::path(root) / "manifest.json", std::ios::binary);
    if (!mf) throw std::runtime_error("save_dataset: cannot write manifest under " + root);
    mf << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& root) {
    std::ifstream mf(fs::path(root) / "manifest.json");
    if (!mf) throw std::runtime_error("load_dataset: missing manifest.json under " + root);
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("load_dataset: bad manifest.json: ") + e.what());
    }

    Dataset ds;

    std::map<std::string, std::vector<double>> gene_rows;
    if (manifest.contains("genes_csv")) {
        const CsvData csv = read_csv((fs::path(root) / manifest["genes_csv"].get<std::string>()).string());
        ds.gene_names.assign(csv.header.begin() + 1, csv.header.end());
        for (const auto& row : csv.rows) {
            std::vector<double> vals;
            vals.reserve(row.size() - 1);
            for (std::size_t i = 1; i < row.size(); ++i) vals.push_back(std::stod(row[i]));
            gene_rows[row[0]] = std::move(vals);
        }
    }

    for (const auto& jc : manifest.at("cases")) {
        CaseRecord c;
        c.id = jc.at("id").get<std::string>();
        for (const auto& [name, jm] : jc.at("modalities").items()) {
            ModalityImage img;
            img.volume = read_volume((fs::path(root) / jm.at("path").get<std::string>()).string());
            img.provenance = jm.value("provenance", "real");
            c.modalities[name] = std::move(img);
        }
        if (jc.contains("mask")) c.mask = read_volume((fs::path(root) / jc["mask"].get<std::string>()).string());
        if (jc.contains("survival_days")) {
            SurvivalRecord s;
            s.id = c.id;
            s.days = jc["survival_days"].get<int>();
            s.age = jc.value("age", 0.0);
            c.survival = s;
        }
        if (jc.contains("oracle_factors"))
            for (const auto& [k, v] : jc["oracle_factors"].items()) c.oracle_factors[k] = v.get<double>();
        auto it = gene_rows.find(c.id);
        if (it != gene_rows.end()) c.gene_row = it->second;
        c.validate();
        ds.cases.push_back(std::move(c));
    }
    return ds;
}

}  // namespace octorad
