#include "octorad/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace octorad::nn {

namespace {

constexpr char kMagic[8] = {'O', 'R', 'A', 'D', 'C', 'K', 'P', '1'};

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint: truncated archive");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

const std::vector<float>* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, a] : arrays)
        if (n == name) return &a;
    return nullptr;
}

void save_checkpoint(const std::string& path, const nlohmann::json& descriptor, const NamedTensors& state) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));

    const std::string desc = descriptor.dump();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(desc.size()));
    out += desc;

    put<std::uint32_t>(out, static_cast<std::uint32_t>(state.size()));
    for (const auto& [name, tensor] : state) {
        if (name.size() > 0xffff) throw std::runtime_error("checkpoint: parameter name too long");
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out += name;
        put<std::uint64_t>(out, static_cast<std::uint64_t>(tensor->numel()));
        for (std::int64_t i = 0; i < tensor->numel(); ++i) put<float>(out, static_cast<float>((*tensor)[i]));
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    pos += sizeof(kMagic);

    Checkpoint ckpt;
    const auto desc_len = take<std::uint32_t>(in, pos);
    if (pos + desc_len > in.size()) throw std::runtime_error("checkpoint: truncated descriptor in " + path);
    try {
        ckpt.descriptor = nlohmann::json::parse(in.substr(pos, desc_len));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint: bad descriptor json: " + std::string(e.what()));
    }
    pos += desc_len;

    const auto n_arrays = take<std::uint32_t>(in, pos);
    ckpt.arrays.reserve(n_arrays);
    for (std::uint32_t a = 0; a < n_arrays; ++a) {
        const auto name_len = take<std::uint16_t>(in, pos);
        if (pos + name_len > in.size()) throw std::runtime_error("checkpoint: truncated name in " + path);
        std::string name = in.substr(pos, name_len);
        pos += name_len;
        const auto count = take<std::uint64_t>(in, pos);
        if (pos + count * 4 > in.size()) throw std::runtime_error("checkpoint: truncated array '" + name + "'");
        std::vector<float> vals(count);
        std::memcpy(vals.data(), in.data() + pos, count * 4);
        pos += count * 4;
        ckpt.arrays.emplace_back(std::move(name), std::move(vals));
    }
    return ckpt;
}

void load_into_state(const Checkpoint& ckpt, const NamedTensors& state) {
    for (const auto& [name, tensor] : state) {
        const auto* arr = ckpt.find(name);
        if (!arr) throw std::runtime_error("checkpoint: missing array '" + name + "'");
        if (static_cast<std::int64_t>(arr->size()) != tensor->numel())
            throw std::runtime_error("checkpoint: array '" + name + "' has length " + std::to_string(arr->size()) +
                                     ", expected " + std::to_string(tensor->numel()));
        for (std::size_t i = 0; i < arr->size(); ++i) (*tensor)[static_cast<std::int64_t>(i)] = (*arr)[i];
    }
}

}  // namespace octorad::nn
