#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "octorad/nn/layers.hpp"

namespace octorad::nn {

// Paired high/low frequency feature bundle. The low branch runs at half the
// spatial resolution of the high branch; either side may be absent.
struct OctTensor {
    Tensor high;
    Tensor low;

    bool has_high() const { return !high.empty(); }
    bool has_low() const { return !low.empty(); }

    static OctTensor from_plain(Tensor t) {
        OctTensor o;
        o.high = std::move(t);
        return o;
    }
    void validate(const char* where) const;
};

inline int low_channel_count(int total, double alpha) {
    const int cl = static_cast<int>(std::lround(alpha * total));
    return std::min(std::max(cl, 0), total);
}

// Octave convolution: separate 3x3 convolutions per frequency branch with the
// four cross paths high->high, high->low (average-pooled), low->low and
// low->high (nearest-upsampled) summed per output branch.
class OctaveConv2d {
public:
    OctaveConv2d() = default;
    OctaveConv2d(int in_ch, int out_ch, double alpha_in, double alpha_out, int k = 3, int pad = 1);

    void init(Rng& rng);
    OctTensor forward(const OctTensor& x);
    OctTensor backward(const OctTensor& gy);
    void collect(const std::string& prefix, ParamList& out);

    int in_high() const { return in_h_; }
    int in_low() const { return in_l_; }
    int out_high() const { return out_h_; }
    int out_low() const { return out_l_; }

    Conv2d hh, hl, lh, ll;

private:
    int in_ch_ = 0, out_ch_ = 0, in_h_ = 0, in_l_ = 0, out_h_ = 0, out_l_ = 0;
    AvgPool2x2 pool_;
    UpsampleNearest2x up_;
};

// Concurrent spatial & channel excitation; outputs the elementwise max (or
// sum) of the channel-gated and spatially-gated copies of the input.
class ScSE {
public:
    enum class Combine { Max, Sum };

    ScSE() = default;
    ScSE(int channels, int reduction, Combine combine = Combine::Max);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);
    void collect(const std::string& prefix, ParamList& out);

    // test hooks: pin every gate to a constant instead of the learned heads
    std::optional<double> force_channel_gates;
    std::optional<double> force_spatial_gates;

    Conv2d fc1, fc2;   // channel head (1x1 convs over pooled {N,C,1,1})
    Conv2d spatial;    // spatial head (1x1 conv to one channel)

private:
    int channels_ = 0, reduction_ = 1;
    Combine combine_ = Combine::Max;
    ReLU relu_;
    Sigmoid csig_, ssig_;
    Tensor x_cache_, cgate_cache_, sgate_cache_;
    std::vector<unsigned char> take_channel_;
};

// scSE on an inner-imaging 1x1 grouped convolution, plus an identity skip:
// y = scse(inner(x)) + x. With all gates at zero this is exactly the identity.
class SkipScSE {
public:
    SkipScSE() = default;
    SkipScSE(int channels, int reduction, ScSE::Combine combine = ScSE::Combine::Max);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);
    void collect(const std::string& prefix, ParamList& out);

    void make_inner_identity();  // for tests

    Conv2d inner;
    ScSE scse;

private:
    int channels_ = 0;
};

// Two octave convolutions with ReLU, then stride-2 max pooling. Skip output
// precedes the pooling.
class EncoderBlock {
public:
    struct Outputs {
        OctTensor skip;
        OctTensor down;
    };

    EncoderBlock() = default;
    EncoderBlock(int in_ch, int out_ch, double alpha_in, double alpha_mid, double alpha_out);

    void init(Rng& rng);
    Outputs forward(const OctTensor& x);
    OctTensor backward(const OctTensor& g_skip, const OctTensor& g_down);
    void collect(const std::string& prefix, ParamList& out);

    OctaveConv2d oc1, oc2;

private:
    double alpha_out_ = 0.0;
    ReLU r1h_, r1l_, r2h_, r2l_;
    MaxPool2x2 ph_, pl_;
};

// Concat with the skip, 3x3 conv, batch-norm + leaky activation, skip-scSE,
// then an optional 4x4 stride-2 deconvolution that doubles the spatial dims.
class DecoderBlock {
public:
    DecoderBlock() = default;
    DecoderBlock(int x_ch, int skip_ch, int out_ch, int se_reduction, bool with_deconv);

    void init(Rng& rng);
    Tensor forward(const Tensor& x, const Tensor* skip, bool train);
    // returns {gx, gskip}; gskip empty when the block has no skip input
    std::pair<Tensor, Tensor> backward(const Tensor& gy);
    void collect(const std::string& prefix, ParamList& out);
    void collect_buffers(const std::string& prefix, std::vector<std::pair<std::string, Tensor*>>& out);

    Conv2d conv;
    BatchNorm2d bn;
    SkipScSE scse;
    ConvTranspose2d deconv;

private:
    int x_ch_ = 0, skip_ch_ = 0;
    bool with_deconv_ = true;
    LeakyReLU act_{0.01};
};

}  // namespace octorad::nn
