#pragma once

#include "octorad/nn/layers.hpp"

namespace octorad::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

class Adam {
public:
    Adam() = default;
    Adam(ParamList params, AdamConfig cfg);

    void zero_grad();
    void step();

    const AdamConfig& config() const { return cfg_; }

private:
    ParamList params_;
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace octorad::nn
