#pragma once

#include <memory>

#include "octorad/nn/blocks.hpp"

namespace octorad::nn {

// Upsamples the low branch and concatenates it onto the high branch.
class OctMerge {
public:
    Tensor forward(const OctTensor& x);
    OctTensor backward(const Tensor& g);

private:
    bool had_low_ = false;
    int high_ch_ = 0;
    UpsampleNearest2x up_;
};

struct FcnConfig {
    int in_channels = 3;
    int out_channels = 4;
    int depth = 3;
    int base_channels = 8;
    double alpha = 0.25;
    int se_reduction = 2;
};

// UNet-topology FCN: octave-convolution encoder blocks, skip-scSE decoder
// blocks with trailing deconvolutions, and a final 1x1 convolution over the
// merged high/low features. The deepest encoder folds its low branch back
// into the high branch so the bridge runs single-branch at any depth.
class OctFcn {
public:
    OctFcn() = default;
    explicit OctFcn(const FcnConfig& cfg);

    void init(Rng& rng);
    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& gy);  // returns input gradient
    void collect(ParamList& out);
    std::vector<std::pair<std::string, Tensor*>> state();  // weights + BN statistics

    const FcnConfig& config() const { return cfg_; }
    std::int64_t parameter_count();

    std::vector<EncoderBlock> encoders;
    DecoderBlock bridge;
    std::vector<DecoderBlock> decoders;  // index = level, decoders[0] has no deconv
    Conv2d final_conv;

private:
    FcnConfig cfg_;
    std::vector<OctMerge> merges_;
};

struct PlainEncDecConfig {
    int in_channels = 3;
    int out_channels = 1;
    int depth = 3;
    int base_channels = 8;
    bool final_sigmoid = true;
};

// Light-weight plain encoder-decoder (no octave paths, no excitation); used
// as the dense discriminator. Output is a full-resolution map in (0,1).
class PlainEncDec {
public:
    PlainEncDec() = default;
    explicit PlainEncDec(const PlainEncDecConfig& cfg);

    void init(Rng& rng);
    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& gy);
    void collect(ParamList& out);
    std::vector<std::pair<std::string, Tensor*>> state();

    const PlainEncDecConfig& config() const { return cfg_; }

private:
    PlainEncDecConfig cfg_;
    std::vector<Conv2d> enc_convs_;
    std::vector<LeakyReLU> enc_acts_;
    std::vector<MaxPool2x2> pools_;
    Conv2d mid_conv_;
    LeakyReLU mid_act_{0.2};
    std::vector<ConvTranspose2d> dec_convs_;
    std::vector<LeakyReLU> dec_acts_;
    Conv2d final_conv_;
    Sigmoid sig_;
};

}  // namespace octorad::nn
