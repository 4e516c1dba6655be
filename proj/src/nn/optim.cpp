#include "octorad/nn/optim.hpp"

#include <cmath>

namespace octorad::nn {

Adam::Adam(ParamList params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        m_[i].assign(static_cast<std::size_t>(params_[i].value->numel()), 0.0);
        v_[i].assign(static_cast<std::size_t>(params_[i].value->numel()), 0.0);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.grad->fill(0.0);
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& w = *params_[i].value;
        const Tensor& g = *params_[i].grad;
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::int64_t j = 0; j < w.numel(); ++j) {
            const double grad = g[j] + cfg_.weight_decay * w[j];
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * grad;
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * grad * grad;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace octorad::nn
