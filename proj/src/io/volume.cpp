#include "octorad/io/volume.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace octorad {

using nlohmann::json;

static_assert(sizeof(float) == 4, "raw payloads assume 4-byte float");

namespace {

bool is_little_endian() {
    const std::uint16_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

void byteswap_inplace(std::vector<char>& bytes, std::size_t elem) {
    for (std::size_t i = 0; i + elem <= bytes.size(); i += elem)
        for (std::size_t j = 0; j < elem / 2; ++j)
            std::swap(bytes[i + j], bytes[i + elem - 1 - j]);
}

}  // namespace

void write_volume(const Volume& vol, const std::string& base_path) {
    const std::size_t expected = static_cast<std::size_t>(vol.dims[0]) * vol.dims[1] * vol.dims[2];
    if (vol.voxels.size() != expected)
        throw std::runtime_error("write_volume: payload length does not match dims");

    json sidecar;
    sidecar["dims"] = {vol.dims[0], vol.dims[1], vol.dims[2]};
    sidecar["spacing_mm"] = {vol.spacing[0], vol.spacing[1], vol.spacing[2]};
    sidecar["origin_mm"] = {vol.origin[0], vol.origin[1], vol.origin[2]};
    sidecar["dtype"] = vol.dtype == VoxelType::F32 ? "f32" : "i16";
    sidecar["order"] = "C-little-endian";

    {
        std::ofstream jf(base_path + ".json", std::ios::binary);
        if (!jf) throw std::runtime_error("write_volume: cannot open " + base_path + ".json");
        jf << sidecar.dump(2) << "\n";
    }

    const std::size_t elem = vol.dtype == VoxelType::F32 ? 4 : 2;
    std::vector<char> bytes(expected * elem);
    if (vol.dtype == VoxelType::F32) {
        for (std::size_t i = 0; i < expected; ++i) {
            const float f = static_cast<float>(vol.voxels[i]);
            std::memcpy(bytes.data() + i * 4, &f, 4);
        }
    } else {
        for (std::size_t i = 0; i < expected; ++i) {
            const std::int16_t v = static_cast<std::int16_t>(vol.voxels[i]);
            std::memcpy(bytes.data() + i * 2, &v, 2);
        }
    }
    if (!is_little_endian()) byteswap_inplace(bytes, elem);

    std::ofstream rf(base_path + ".raw", std::ios::binary);
    if (!rf) throw std::runtime_error("write_volume: cannot open " + base_path + ".raw");
    rf.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!rf) throw std::runtime_error("write_volume: raw write failed for " + base_path);
}

Volume read_volume(const std::string& base_path) {
    std::ifstream jf(base_path + ".json", std::ios::binary);
    if (!jf) throw std::runtime_error("read_volume: missing sidecar " + base_path + ".json");
    json sidecar;
    try {
        jf >> sidecar;
    } catch (const json::exception& e) {
        throw std::runtime_error("read_volume: bad sidecar " + base_path + ".json: " + e.what());
    }

    Volume vol;
    const auto dims = sidecar.at("dims");
    const auto spacing = sidecar.at("spacing_mm");
    const auto origin = sidecar.at("origin_mm");
    for (int i = 0; i < 3; ++i) {
        vol.dims[i] = dims.at(i).get<int>();
        vol.spacing[i] = spacing.at(i).get<double>();
        vol.origin[i] = origin.at(i).get<double>();
        if (vol.dims[i] <= 0) throw std::runtime_error("read_volume: nonpositive dims in " + base_path);
        if (vol.spacing[i] <= 0) throw std::runtime_error("read_volume: nonpositive spacing in " + base_path);
    }
    const std::string dtype = sidecar.at("dtype").get<std::string>();
    if (dtype == "f32")
        vol.dtype = VoxelType::F32;
    else if (dtype == "i16")
        vol.dtype = VoxelType::I16;
    else
        throw std::runtime_error("read_volume: unknown dtype '" + dtype + "' in " + base_path);

    std::ifstream rf(base_path + ".raw", std::ios::binary | std::ios::ate);
    if (!rf) throw std::runtime_error("read_volume: missing payload " + base_path + ".raw");
    const std::size_t nbytes = static_cast<std::size_t>(rf.tellg());
    rf.seekg(0);

    const std::size_t count = static_cast<std::size_t>(vol.dims[0]) * vol.dims[1] * vol.dims[2];
    const std::size_t elem = vol.dtype == VoxelType::F32 ? 4 : 2;
    if (nbytes != count * elem)
        throw std::runtime_error("read_volume: payload size mismatch for " + base_path + " (got " +
                                 std::to_string(nbytes) + " bytes, expected " + std::to_string(count * elem) + ")");

    std::vector<char> bytes(nbytes);
    rf.read(bytes.data(), static_cast<std::streamsize>(nbytes));
    if (!rf) throw std::runtime_error("read_volume: raw read failed for " + base_path);
    if (!is_little_endian()) byteswap_inplace(bytes, elem);

    vol.voxels.resize(count);
    if (vol.dtype == VoxelType::F32) {
        for (std::size_t i = 0; i < count; ++i) {
            float f;
            std::memcpy(&f, bytes.data() + i * 4, 4);
            vol.voxels[i] = f;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::int16_t v;
            std::memcpy(&v, bytes.data() + i * 2, 2);
            vol.voxels[i] = v;
        }
    }
    return vol;
}

}  // namespace octorad
