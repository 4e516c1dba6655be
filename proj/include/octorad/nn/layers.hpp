#pragma once

#include <optional>
#include <string>
#include <vector>

#include "octorad/core/rng.hpp"
#include "octorad/core/tensor.hpp"

namespace octorad::nn {

struct ParamEntry {
    std::string name;
    Tensor* value;
    Tensor* grad;
};
using ParamList = std::vector<ParamEntry>;

// ---------------------------------------------------------------------------
// Convolution, stride/pad/groups, square kernel. Layout {N,C,H,W}.
// ---------------------------------------------------------------------------
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int k, int stride = 1, int pad = 0, int groups = 1, bool bias = true);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);  // accumulates weight grads, returns input grad
    void collect(const std::string& prefix, ParamList& out);

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }

    Tensor w;  // [out_ch, in_ch/groups, k, k]
    Tensor b;  // [out_ch]
    Tensor gw, gb;

private:
    int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0, groups_ = 1;
    bool bias_ = true;
    Tensor x_cache_;
};

// 4x4 stride-2 pad-1 style transposed convolution (spatial dims double for
// those defaults). Weight layout [in_ch, out_ch, k, k].
class ConvTranspose2d {
public:
    ConvTranspose2d() = default;
    ConvTranspose2d(int in_ch, int out_ch, int k, int stride, int pad, bool bias = true);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);
    void collect(const std::string& prefix, ParamList& out);

    Tensor w;  // [in_ch, out_ch, k, k]
    Tensor b;  // [out_ch]
    Tensor gw, gb;

private:
    int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 2, pad_ = 1;
    bool bias_ = true;
    Tensor x_cache_;
};

class MaxPool2x2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    std::vector<int> argmax_;
    std::vector<int> in_shape_;
};

class AvgPool2x2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    std::vector<int> in_shape_;
};

class UpsampleNearest2x {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    std::vector<int> in_shape_;
};

class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1);

    void init(Rng& rng);
    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& gy);
    void collect(const std::string& prefix, ParamList& out);
    void collect_buffers(const std::string& prefix, std::vector<std::pair<std::string, Tensor*>>& out);

    Tensor gamma, beta;
    Tensor ggamma, gbeta;
    Tensor running_mean, running_var;

private:
    int channels_ = 0;
    double eps_ = 1e-5, momentum_ = 0.1;
    bool last_train_ = true;
    Tensor xhat_cache_;
    std::vector<double> invstd_cache_;
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    std::vector<unsigned char> mask_;
};

class LeakyReLU {
public:
    explicit LeakyReLU(double slope = 0.01) : slope_(slope) {}
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    double slope_ = 0.01;
    std::vector<unsigned char> mask_;
};

class Sigmoid {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    Tensor y_cache_;
};

// channel-dimension concat of two {N,C,H,W} tensors
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& g, int c_first, Tensor& ga, Tensor& gb);

}  // namespace octorad::nn
