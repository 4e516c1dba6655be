#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "octorad/nn/layers.hpp"

namespace octorad::nn {

// Name -> tensor view of a network's full state (weights plus batch-norm
// running statistics).
using NamedTensors = std::vector<std::pair<std::string, Tensor*>>;

// Single-file archive: a JSON architecture descriptor (enough on its own to
// rebuild the network) followed by named little-endian float32 weight arrays.
struct Checkpoint {
    nlohmann::json descriptor;
    std::vector<std::pair<std::string, std::vector<float>>> arrays;

    const std::vector<float>* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const nlohmann::json& descriptor, const NamedTensors& state);
Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint arrays into the given tensors, matching by name.
// Throws if an array is missing or has the wrong length.
void load_into_state(const Checkpoint& ckpt, const NamedTensors& state);

}  // namespace octorad::nn
