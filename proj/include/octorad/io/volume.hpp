#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace octorad {

enum class VoxelType { F32, I16 };

// 3-D scalar grid with geometry. Payload is kept as doubles in memory;
// on disk it is a raw little-endian array next to a JSON sidecar.
struct Volume {
    std::array<int, 3> dims{0, 0, 0};            // X,Y,Z voxel counts
    std::array<double, 3> spacing{1.0, 1.0, 1.0};  // mm
    std::array<double, 3> origin{0.0, 0.0, 0.0};   // mm
    VoxelType dtype = VoxelType::F32;
    std::vector<double> voxels;  // x fastest, then y, then z

    Volume() = default;
    Volume(int x, int y, int z, VoxelType t = VoxelType::F32)
        : dims{x, y, z}, dtype(t), voxels(static_cast<std::size_t>(x) * y * z, 0.0) {}

    std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * dims[1] + y) * dims[0] + x;
    }
    double& at(int x, int y, int z) { return voxels[index(x, y, z)]; }
    double at(int x, int y, int z) const { return voxels[index(x, y, z)]; }

    std::size_t size() const { return voxels.size(); }
    bool same_grid(const Volume& o) const { return dims == o.dims && spacing == o.spacing; }
};

// Persists `vol` as <base>.json + <base>.raw.
void write_volume(const Volume& vol, const std::string& base_path);

// Reads a volume previously written by write_volume. Throws on missing files,
// unknown dtype or sidecar/payload size mismatch.
Volume read_volume(const std::string& base_path);

}  // namespace octorad
