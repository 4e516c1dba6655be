#include "octorad/nn/fcn.hpp"

#include <stdexcept>

namespace octorad::nn {

// ---------------------------------------------------------------- OctMerge --

Tensor OctMerge::forward(const OctTensor& x) {
    had_low_ = x.has_low();
    if (!had_low_) return x.high;
    high_ch_ = x.high.dim(1);
    return concat_channels(x.high, up_.forward(x.low));
}

OctTensor OctMerge::backward(const Tensor& g) {
    OctTensor gx;
    if (!had_low_) {
        gx.high = g;
        return gx;
    }
    Tensor gh, gu;
    split_channels(g, high_ch_, gh, gu);
    gx.high = std::move(gh);
    gx.low = up_.backward(gu);
    return gx;
}

// ------------------------------------------------------------------ OctFcn --

OctFcn::OctFcn(const FcnConfig& cfg) : cfg_(cfg) {
    if (cfg.depth < 1) throw std::invalid_argument("OctFcn: depth must be >= 1");
    if (cfg.base_channels < 2) throw std::invalid_argument("OctFcn: base_channels must be >= 2");
    if (cfg.alpha < 0 || cfg.alpha >= 1) throw std::invalid_argument("OctFcn: alpha must lie in [0,1)");

    const int d = cfg.depth;
    auto level_ch = [&](int i) { return cfg.base_channels << i; };

    encoders.reserve(d);
    for (int i = 0; i < d; ++i) {
        const int in_ch = i == 0 ? cfg.in_channels : level_ch(i - 1);
        const double alpha_in = i == 0 ? 0.0 : cfg.alpha;
        const double alpha_out = i == d - 1 ? 0.0 : cfg.alpha;  // deepest block merges
        encoders.emplace_back(in_ch, level_ch(i), alpha_in, cfg.alpha, alpha_out);
    }
    merges_.resize(d);

    bridge = DecoderBlock(level_ch(d - 1), 0, level_ch(d - 1), cfg.se_reduction, /*deconv=*/true);

    decoders.resize(d);
    for (int i = d - 1; i >= 1; --i)
        decoders[i] = DecoderBlock(level_ch(i), level_ch(i), level_ch(i - 1), cfg.se_reduction, /*deconv=*/true);
    decoders[0] = DecoderBlock(level_ch(0), level_ch(0), level_ch(0), cfg.se_reduction, /*deconv=*/false);

    final_conv = Conv2d(level_ch(0), cfg.out_channels, 1, 1, 0, 1, true);
}

void OctFcn::init(Rng& rng) {
    for (auto& e : encoders) e.init(rng);
    bridge.init(rng);
    for (auto& dcd : decoders) dcd.init(rng);
    final_conv.init(rng);
}

Tensor OctFcn::forward(const Tensor& x, bool train) {
    if (x.ndim() != 4) throw std::invalid_argument("OctFcn: expected {N,C,H,W}");
    if (x.dim(1) != cfg_.in_channels)
        throw std::invalid_argument("OctFcn: expected " + std::to_string(cfg_.in_channels) + " input channels, got " +
                                    std::to_string(x.dim(1)));
    const int div = 1 << cfg_.depth;
    if (x.dim(2) % div || x.dim(3) % div)
        throw std::invalid_argument("OctFcn: spatial dims " + x.shape_str() + " not divisible by 2^depth = " +
                                    std::to_string(div));

    OctTensor cur = OctTensor::from_plain(x);
    std::vector<Tensor> merged(encoders.size());
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        auto out = encoders[i].forward(cur);
        merged[i] = merges_[i].forward(out.skip);
        cur = std::move(out.down);
    }

    Tensor h = bridge.forward(cur.high, nullptr, train);
    for (int i = static_cast<int>(encoders.size()) - 1; i >= 0; --i)
        h = decoders[i].forward(h, &merged[i], train);
    return final_conv.forward(h);
}

Tensor OctFcn::backward(const Tensor& gy) {
    Tensor g = final_conv.backward(gy);
    std::vector<Tensor> gskips(encoders.size());
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        auto [gx, gskip] = decoders[i].backward(g);
        g = std::move(gx);
        gskips[i] = std::move(gskip);
    }
    auto [gbridge, unused] = bridge.backward(g);
    (void)unused;

    OctTensor gdown;
    gdown.high = std::move(gbridge);
    for (int i = static_cast<int>(encoders.size()) - 1; i >= 0; --i) {
        OctTensor gskip_oct = merges_[i].backward(gskips[i]);
        gdown = encoders[i].backward(gskip_oct, gdown);
    }
    return gdown.high;
}

void OctFcn::collect(ParamList& out) {
    for (std::size_t i = 0; i < encoders.size(); ++i) encoders[i].collect("enc" + std::to_string(i), out);
    bridge.collect("bridge", out);
    for (std::size_t i = 0; i < decoders.size(); ++i) decoders[i].collect("dec" + std::to_string(i), out);
    final_conv.collect("final", out);
}

std::vector<std::pair<std::string, Tensor*>> OctFcn::state() {
    std::vector<std::pair<std::string, Tensor*>> out;
    ParamList params;
    collect(params);
    for (const auto& p : params) out.emplace_back(p.name, p.value);
    bridge.collect_buffers("bridge", out);
    for (std::size_t i = 0; i < decoders.size(); ++i) decoders[i].collect_buffers("dec" + std::to_string(i), out);
    return out;
}

std::int64_t OctFcn::parameter_count() {
    ParamList params;
    collect(params);
    std::int64_t n = 0;
    for (const auto& p : params) n += p.value->numel();
    return n;
}

// ------------------------------------------------------------- PlainEncDec --

PlainEncDec::PlainEncDec(const PlainEncDecConfig& cfg) : cfg_(cfg) {
    if (cfg.depth < 1) throw std::invalid_argument("PlainEncDec: depth must be >= 1");
    auto level_ch = [&](int i) { return cfg.base_channels << i; };

    enc_convs_.reserve(cfg.depth);
    for (int i = 0; i < cfg.depth; ++i) {
        const int in_ch = i == 0 ? cfg.in_channels : level_ch(i - 1);
        enc_convs_.emplace_back(in_ch, level_ch(i), 3, 1, 1, 1, true);
        enc_acts_.emplace_back(0.2);
    }
    pools_.resize(cfg.depth);
    mid_conv_ = Conv2d(level_ch(cfg.depth - 1), level_ch(cfg.depth - 1), 3, 1, 1, 1, true);

    dec_convs_.reserve(cfg.depth);
    for (int i = cfg.depth - 1; i >= 1; --i) {
        dec_convs_.emplace_back(level_ch(i), level_ch(i - 1), 4, 2, 1, true);
        dec_acts_.emplace_back(0.2);
    }
    dec_convs_.emplace_back(level_ch(0), level_ch(0), 4, 2, 1, true);
    dec_acts_.emplace_back(0.2);

    final_conv_ = Conv2d(level_ch(0), cfg.out_channels, 1, 1, 0, 1, true);
}

void PlainEncDec::init(Rng& rng) {
    for (auto& c : enc_convs_) c.init(rng);
    mid_conv_.init(rng);
    for (auto& c : dec_convs_) c.init(rng);
    final_conv_.init(rng);
}

Tensor PlainEncDec::forward(const Tensor& x, bool /*train*/) {
    const int div = 1 << cfg_.depth;
    if (x.dim(2) % div || x.dim(3) % div)
        throw std::invalid_argument("PlainEncDec: spatial dims " + x.shape_str() + " not divisible by 2^depth");

    Tensor h = x;
    for (std::size_t i = 0; i < enc_convs_.size(); ++i) {
        h = enc_acts_[i].forward(enc_convs_[i].forward(h));
        h = pools_[i].forward(h);
    }
    h = mid_act_.forward(mid_conv_.forward(h));
    for (std::size_t i = 0; i < dec_convs_.size(); ++i) h = dec_acts_[i].forward(dec_convs_[i].forward(h));
    h = final_conv_.forward(h);
    return cfg_.final_sigmoid ? sig_.forward(h) : h;
}

Tensor PlainEncDec::backward(const Tensor& gy) {
    Tensor g = cfg_.final_sigmoid ? sig_.backward(gy) : gy;
    g = final_conv_.backward(g);
    for (int i = static_cast<int>(dec_convs_.size()) - 1; i >= 0; --i)
        g = dec_convs_[i].backward(dec_acts_[i].backward(g));
    g = mid_conv_.backward(mid_act_.backward(g));
    for (int i = static_cast<int>(enc_convs_.size()) - 1; i >= 0; --i) {
        g = pools_[i].backward(g);
        g = enc_convs_[i].backward(enc_acts_[i].backward(g));
    }
    return g;
}

void PlainEncDec::collect(ParamList& out) {
    for (std::size_t i = 0; i < enc_convs_.size(); ++i) enc_convs_[i].collect("enc" + std::to_string(i), out);
    mid_conv_.collect("mid", out);
    for (std::size_t i = 0; i < dec_convs_.size(); ++i) dec_convs_[i].collect("dec" + std::to_string(i), out);
    final_conv_.collect("final", out);
}

std::vector<std::pair<std::string, Tensor*>> PlainEncDec::state() {
    std::vector<std::pair<std::string, Tensor*>> out;
    ParamList params;
    collect(params);
    for (const auto& p : params) out.emplace_back(p.name, p.value);
    return out;
}

}  // namespace octorad::nn
