#include "octorad/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace octorad::nn {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

namespace {

int conv_out_dim(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

// x: one item [C,H,W] -> col [C*k*k, Ho*Wo]
void im2col(const double* x, int C, int H, int W, int k, int stride, int pad, double* col) {
    const int Ho = conv_out_dim(H, k, stride, pad);
    const int Wo = conv_out_dim(W, k, stride, pad);
    const int plane = Ho * Wo;
    for (int c = 0; c < C; ++c) {
        const double* xc = x + static_cast<std::size_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                double* row = col + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * plane;
                for (int oh = 0; oh < Ho; ++oh) {
                    const int ih = oh * stride - pad + ki;
                    if (ih < 0 || ih >= H) {
                        for (int ow = 0; ow < Wo; ++ow) row[oh * Wo + ow] = 0.0;
                        continue;
                    }
                    const double* xr = xc + static_cast<std::size_t>(ih) * W;
                    for (int ow = 0; ow < Wo; ++ow) {
                        const int iw = ow * stride - pad + kj;
                        row[oh * Wo + ow] = (iw < 0 || iw >= W) ? 0.0 : xr[iw];
                    }
                }
            }
        }
    }
}

// col [C*k*k, Ho*Wo] accumulated back into x [C,H,W]
void col2im(const double* col, int C, int H, int W, int k, int stride, int pad, double* x) {
    const int Ho = conv_out_dim(H, k, stride, pad);
    const int Wo = conv_out_dim(W, k, stride, pad);
    const int plane = Ho * Wo;
    for (int c = 0; c < C; ++c) {
        double* xc = x + static_cast<std::size_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                const double* row = col + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * plane;
                for (int oh = 0; oh < Ho; ++oh) {
                    const int ih = oh * stride - pad + ki;
                    if (ih < 0 || ih >= H) continue;
                    double* xr = xc + static_cast<std::size_t>(ih) * W;
                    for (int ow = 0; ow < Wo; ++ow) {
                        const int iw = ow * stride - pad + kj;
                        if (iw >= 0 && iw < W) xr[iw] += row[oh * Wo + ow];
                    }
                }
            }
        }
    }
}

void require_4d(const Tensor& x, const char* where) {
    if (x.ndim() != 4) throw std::invalid_argument(std::string(where) + ": expected {N,C,H,W}, got " + x.shape_str());
}

}  // namespace

// ----------------------------------------------------------------- Conv2d --

Conv2d::Conv2d(int in_ch, int out_ch, int k, int stride, int pad, int groups, bool bias)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad), groups_(groups), bias_(bias) {
    if (in_ch % groups || out_ch % groups) throw std::invalid_argument("Conv2d: channels not divisible by groups");
    w = Tensor({out_ch, in_ch / groups, k, k});
    gw = Tensor({out_ch, in_ch / groups, k, k});
    b = Tensor({out_ch});
    gb = Tensor({out_ch});
}

void Conv2d::init(Rng& rng) {
    const double fan_in = static_cast<double>(in_ch_ / groups_) * k_ * k_;
    const double std = std::sqrt(2.0 / fan_in);
    for (std::int64_t i = 0; i < w.numel(); ++i) w[i] = std * rng.normal();
    b.fill(0.0);
}

Tensor Conv2d::forward(const Tensor& x) {
    require_4d(x, "Conv2d");
    if (x.dim(1) != in_ch_) throw std::invalid_argument("Conv2d: channel mismatch " + x.shape_str());
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int Ho = conv_out_dim(H, k_, stride_, pad_), Wo = conv_out_dim(W, k_, stride_, pad_);
    if (Ho <= 0 || Wo <= 0) throw std::invalid_argument("Conv2d: output dims nonpositive");

    x_cache_ = x;
    Tensor y({N, out_ch_, Ho, Wo});

    const int ckk = (in_ch_ / groups_) * k_ * k_;
    const int out_pg = out_ch_ / groups_;
    const int plane = Ho * Wo;
    std::vector<double> col(static_cast<std::size_t>(in_ch_) * k_ * k_ * plane);

    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<std::size_t>(n) * in_ch_ * H * W, in_ch_, H, W, k_, stride_, pad_, col.data());
        for (int g = 0; g < groups_; ++g) {
            CMapM Wm(w.data() + static_cast<std::size_t>(g) * out_pg * ckk, out_pg, ckk);
            CMapM Cm(col.data() + static_cast<std::size_t>(g) * ckk * plane, ckk, plane);
            MapM Ym(y.data() + (static_cast<std::size_t>(n) * out_ch_ + g * out_pg) * plane, out_pg, plane);
            Ym.noalias() = Wm * Cm;
        }
        if (bias_) {
            for (int c = 0; c < out_ch_; ++c) {
                double* yp = y.data() + (static_cast<std::size_t>(n) * out_ch_ + c) * plane;
                const double bc = b[c];
                for (int i = 0; i < plane; ++i) yp[i] += bc;
            }
        }
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    const Tensor& x = x_cache_;
    if (x.empty()) throw std::logic_error("Conv2d::backward before forward");
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int Ho = gy.dim(2), Wo = gy.dim(3);
    const int ckk = (in_ch_ / groups_) * k_ * k_;
    const int out_pg = out_ch_ / groups_;
    const int plane = Ho * Wo;

    Tensor gx({N, in_ch_, H, W});
    std::vector<double> col(static_cast<std::size_t>(in_ch_) * k_ * k_ * plane);
    std::vector<double> gcol(col.size());

    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<std::size_t>(n) * in_ch_ * H * W, in_ch_, H, W, k_, stride_, pad_, col.data());
        for (int g = 0; g < groups_; ++g) {
            CMapM Gy(gy.data() + (static_cast<std::size_t>(n) * out_ch_ + g * out_pg) * plane, out_pg, plane);
            CMapM Cm(col.data() + static_cast<std::size_t>(g) * ckk * plane, ckk, plane);
            MapM Gw(gw.data() + static_cast<std::size_t>(g) * out_pg * ckk, out_pg, ckk);
            Gw.noalias() += Gy * Cm.transpose();
            CMapM Wm(w.data() + static_cast<std::size_t>(g) * out_pg * ckk, out_pg, ckk);
            MapM Gc(gcol.data() + static_cast<std::size_t>(g) * ckk * plane, ckk, plane);
            Gc.noalias() = Wm.transpose() * Gy;
        }
        col2im(gcol.data(), in_ch_, H, W, k_, stride_, pad_,
               gx.data() + static_cast<std::size_t>(n) * in_ch_ * H * W);
        if (bias_) {
            for (int c = 0; c < out_ch_; ++c) {
                const double* gp = gy.data() + (static_cast<std::size_t>(n) * out_ch_ + c) * plane;
                double s = 0.0;
                for (int i = 0; i < plane; ++i) s += gp[i];
                gb[c] += s;
            }
        }
    }
    return gx;
}

void Conv2d::collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".w", &w, &gw});
    if (bias_) out.push_back({prefix + ".b", &b, &gb});
}

// -------------------------------------------------------- ConvTranspose2d --

ConvTranspose2d::ConvTranspose2d(int in_ch, int out_ch, int k, int stride, int pad, bool bias)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad), bias_(bias) {
    w = Tensor({in_ch, out_ch, k, k});
    gw = Tensor({in_ch, out_ch, k, k});
    b = Tensor({out_ch});
    gb = Tensor({out_ch});
}

void ConvTranspose2d::init(Rng& rng) {
    const double fan_in = static_cast<double>(in_ch_) * k_ * k_;
    const double std = std::sqrt(2.0 / fan_in);
    for (std::int64_t i = 0; i < w.numel(); ++i) w[i] = std * rng.normal();
    b.fill(0.0);
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
    require_4d(x, "ConvTranspose2d");
    if (x.dim(1) != in_ch_) throw std::invalid_argument("ConvTranspose2d: channel mismatch");
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int Ho = (H - 1) * stride_ - 2 * pad_ + k_;
    const int Wo = (W - 1) * stride_ - 2 * pad_ + k_;

    x_cache_ = x;
    Tensor y({N, out_ch_, Ho, Wo});

    const int rows = out_ch_ * k_ * k_;
    const int plane = H * W;  // "conv output" positions seen from y
    std::vector<double> col(static_cast<std::size_t>(rows) * plane);

    for (int n = 0; n < N; ++n) {
        CMapM Wm(w.data(), in_ch_, rows);
        CMapM Xm(x.data() + static_cast<std::size_t>(n) * in_ch_ * plane, in_ch_, plane);
        MapM Cm(col.data(), rows, plane);
        Cm.noalias() = Wm.transpose() * Xm;
        double* yp = y.data() + static_cast<std::size_t>(n) * out_ch_ * Ho * Wo;
        col2im(col.data(), out_ch_, Ho, Wo, k_, stride_, pad_, yp);
        if (bias_) {
            for (int c = 0; c < out_ch_; ++c) {
                double* ypc = yp + static_cast<std::size_t>(c) * Ho * Wo;
                const double bc = b[c];
                for (int i = 0; i < Ho * Wo; ++i) ypc[i] += bc;
            }
        }
    }
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& gy) {
    const Tensor& x = x_cache_;
    if (x.empty()) throw std::logic_error("ConvTranspose2d::backward before forward");
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int Ho = gy.dim(2), Wo = gy.dim(3);

    const int rows = out_ch_ * k_ * k_;
    const int plane = H * W;
    Tensor gx({N, in_ch_, H, W});
    std::vector<double> gcol(static_cast<std::size_t>(rows) * plane);

    for (int n = 0; n < N; ++n) {
        im2col(gy.data() + static_cast<std::size_t>(n) * out_ch_ * Ho * Wo, out_ch_, Ho, Wo, k_, stride_, pad_,
               gcol.data());
        CMapM Gc(gcol.data(), rows, plane);
        CMapM Wm(w.data(), in_ch_, rows);
        MapM Gx(gx.data() + static_cast<std::size_t>(n) * in_ch_ * plane, in_ch_, plane);
        Gx.noalias() = Wm * Gc;

        CMapM Xm(x.data() + static_cast<std::size_t>(n) * in_ch_ * plane, in_ch_, plane);
        MapM Gw(gw.data(), in_ch_, rows);
        Gw.noalias() += Xm * Gc.transpose();

        if (bias_) {
            for (int c = 0; c < out_ch_; ++c) {
                const double* gp = gy.data() + (static_cast<std::size_t>(n) * out_ch_ + c) * Ho * Wo;
                double s = 0.0;
                for (int i = 0; i < Ho * Wo; ++i) s += gp[i];
                gb[c] += s;
            }
        }
    }
    return gx;
}

void ConvTranspose2d::collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".w", &w, &gw});
    if (bias_) out.push_back({prefix + ".b", &b, &gb});
}

// ------------------------------------------------------------------ pools --

Tensor MaxPool2x2::forward(const Tensor& x) {
    require_4d(x, "MaxPool2x2");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (H % 2 || W % 2) throw std::invalid_argument("MaxPool2x2: odd spatial dims " + x.shape_str());
    in_shape_ = x.shape();
    Tensor y({N, C, H / 2, W / 2});
    argmax_.assign(static_cast<std::size_t>(y.numel()), 0);

    std::int64_t oi = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int oh = 0; oh < H / 2; ++oh)
                for (int ow = 0; ow < W / 2; ++ow, ++oi) {
                    int best_i = 0;
                    double best = -1e308;
                    for (int di = 0; di < 2; ++di)
                        for (int dj = 0; dj < 2; ++dj) {
                            const double v = x.at(n, c, oh * 2 + di, ow * 2 + dj);
                            if (v > best) {
                                best = v;
                                best_i = di * 2 + dj;
                            }
                        }
                    y[oi] = best;
                    argmax_[oi] = best_i;
                }
    return y;
}

Tensor MaxPool2x2::backward(const Tensor& gy) {
    Tensor gx(in_shape_);
    const int N = in_shape_[0], C = in_shape_[1], H = in_shape_[2], W = in_shape_[3];
    std::int64_t oi = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int oh = 0; oh < H / 2; ++oh)
                for (int ow = 0; ow < W / 2; ++ow, ++oi) {
                    const int a = argmax_[oi];
                    gx.at(n, c, oh * 2 + a / 2, ow * 2 + a % 2) += gy[oi];
                }
    return gx;
}

Tensor AvgPool2x2::forward(const Tensor& x) {
    require_4d(x, "AvgPool2x2");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (H % 2 || W % 2) throw std::invalid_argument("AvgPool2x2: odd spatial dims " + x.shape_str());
    in_shape_ = x.shape();
    Tensor y({N, C, H / 2, W / 2});
    std::int64_t oi = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int oh = 0; oh < H / 2; ++oh)
                for (int ow = 0; ow < W / 2; ++ow, ++oi)
                    y[oi] = 0.25 * (x.at(n, c, oh * 2, ow * 2) + x.at(n, c, oh * 2, ow * 2 + 1) +
                                    x.at(n, c, oh * 2 + 1, ow * 2) + x.at(n, c, oh * 2 + 1, ow * 2 + 1));
    return y;
}

Tensor AvgPool2x2::backward(const Tensor& gy) {
    Tensor gx(in_shape_);
    const int N = in_shape_[0], C = in_shape_[1], H = in_shape_[2], W = in_shape_[3];
    std::int64_t oi = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int oh = 0; oh < H / 2; ++oh)
                for (int ow = 0; ow < W / 2; ++ow, ++oi) {
                    const double g = 0.25 * gy[oi];
                    gx.at(n, c, oh * 2, ow * 2) += g;
                    gx.at(n, c, oh * 2, ow * 2 + 1) += g;
                    gx.at(n, c, oh * 2 + 1, ow * 2) += g;
                    gx.at(n, c, oh * 2 + 1, ow * 2 + 1) += g;
                }
    return gx;
}

Tensor UpsampleNearest2x::forward(const Tensor& x) {
    require_4d(x, "UpsampleNearest2x");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    in_shape_ = x.shape();
    Tensor y({N, C, H * 2, W * 2});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int h = 0; h < H * 2; ++h)
                for (int w2 = 0; w2 < W * 2; ++w2) y.at(n, c, h, w2) = x.at(n, c, h / 2, w2 / 2);
    return y;
}

Tensor UpsampleNearest2x::backward(const Tensor& gy) {
    Tensor gx(in_shape_);
    const int N = in_shape_[0], C = in_shape_[1], H = in_shape_[2], W = in_shape_[3];
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int h = 0; h < H * 2; ++h)
                for (int w2 = 0; w2 < W * 2; ++w2) gx.at(n, c, h / 2, w2 / 2) += gy.at(n, c, h, w2);
    return gx;
}

// ------------------------------------------------------------- BatchNorm --

BatchNorm2d::BatchNorm2d(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
    gamma = Tensor::full({channels}, 1.0);
    beta = Tensor({channels});
    ggamma = Tensor({channels});
    gbeta = Tensor({channels});
    running_mean = Tensor({channels});
    running_var = Tensor::full({channels}, 1.0);
}

void BatchNorm2d::init(Rng&) {
    gamma.fill(1.0);
    beta.fill(0.0);
    running_mean.fill(0.0);
    running_var.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    require_4d(x, "BatchNorm2d");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (C != channels_) throw std::invalid_argument("BatchNorm2d: channel mismatch");
    const std::int64_t per_c = static_cast<std::int64_t>(N) * H * W;
    last_train_ = train;

    Tensor y(x.shape());
    invstd_cache_.assign(C, 0.0);

    if (train) {
        xhat_cache_ = Tensor(x.shape());
        for (int c = 0; c < C; ++c) {
            double mean = 0.0;
            for (int n = 0; n < N; ++n) {
                const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) mean += xp[i];
            }
            mean /= static_cast<double>(per_c);
            double var = 0.0;
            for (int n = 0; n < N; ++n) {
                const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) {
                    const double d = xp[i] - mean;
                    var += d * d;
                }
            }
            var /= static_cast<double>(per_c);
            const double invstd = 1.0 / std::sqrt(var + eps_);
            invstd_cache_[c] = invstd;

            const double unbiased = per_c > 1 ? var * static_cast<double>(per_c) / (per_c - 1) : var;
            running_mean[c] = (1.0 - momentum_) * running_mean[c] + momentum_ * mean;
            running_var[c] = (1.0 - momentum_) * running_var[c] + momentum_ * unbiased;

            const double g = gamma[c], bt = beta[c];
            for (int n = 0; n < N; ++n) {
                const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                double* hp = xhat_cache_.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                double* yp = y.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) {
                    hp[i] = (xp[i] - mean) * invstd;
                    yp[i] = g * hp[i] + bt;
                }
            }
        }
    } else {
        for (int c = 0; c < C; ++c) {
            const double invstd = 1.0 / std::sqrt(running_var[c] + eps_);
            invstd_cache_[c] = invstd;
            const double mean = running_mean[c], g = gamma[c], bt = beta[c];
            for (int n = 0; n < N; ++n) {
                const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                double* yp = y.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) yp[i] = g * (xp[i] - mean) * invstd + bt;
            }
        }
        xhat_cache_ = x;  // eval backward only needs the scale
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
    const int N = gy.dim(0), C = gy.dim(1), H = gy.dim(2), W = gy.dim(3);
    const double per_c = static_cast<double>(N) * H * W;
    Tensor gx(gy.shape());

    for (int c = 0; c < C; ++c) {
        const double invstd = invstd_cache_[c];
        const double g = gamma[c];
        if (!last_train_) {
            double sum_gy = 0.0;
            for (int n = 0; n < N; ++n) {
                const double* gp = gy.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                double* xp = gx.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) {
                    xp[i] = gp[i] * g * invstd;
                    sum_gy += gp[i];
                }
            }
            gbeta[c] += sum_gy;
            // ggamma in eval mode uses normalized input
            double sg = 0.0;
            const double mean = running_mean[c];
            for (int n = 0; n < N; ++n) {
                const double* gp = gy.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                const double* xp = xhat_cache_.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) sg += gp[i] * (xp[i] - mean) * invstd;
            }
            ggamma[c] += sg;
            continue;
        }

        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (int n = 0; n < N; ++n) {
            const double* gp = gy.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            const double* hp = xhat_cache_.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            for (int i = 0; i < H * W; ++i) {
                sum_gy += gp[i];
                sum_gy_xhat += gp[i] * hp[i];
            }
        }
        ggamma[c] += sum_gy_xhat;
        gbeta[c] += sum_gy;

        const double scale = g * invstd / per_c;
        for (int n = 0; n < N; ++n) {
            const double* gp = gy.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            const double* hp = xhat_cache_.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            double* xp = gx.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            for (int i = 0; i < H * W; ++i) xp[i] = scale * (per_c * gp[i] - sum_gy - hp[i] * sum_gy_xhat);
        }
    }
    return gx;
}

void BatchNorm2d::collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".gamma", &gamma, &ggamma});
    out.push_back({prefix + ".beta", &beta, &gbeta});
}

void BatchNorm2d::collect_buffers(const std::string& prefix, std::vector<std::pair<std::string, Tensor*>>& out) {
    out.emplace_back(prefix + ".running_mean", &running_mean);
    out.emplace_back(prefix + ".running_var", &running_var);
}

// ----------------------------------------------------------- activations --

Tensor ReLU::forward(const Tensor& x) {
    Tensor y(x.shape());
    mask_.assign(static_cast<std::size_t>(x.numel()), 0);
    for (std::int64_t i = 0; i < x.numel(); ++i) {
        if (x[i] > 0) {
            y[i] = x[i];
            mask_[i] = 1;
        }
    }
    return y;
}

Tensor ReLU::backward(const Tensor& gy) {
    Tensor gx(gy.shape());
    for (std::int64_t i = 0; i < gy.numel(); ++i) gx[i] = mask_[i] ? gy[i] : 0.0;
    return gx;
}

Tensor LeakyReLU::forward(const Tensor& x) {
    Tensor y(x.shape());
    mask_.assign(static_cast<std::size_t>(x.numel()), 0);
    for (std::int64_t i = 0; i < x.numel(); ++i) {
        if (x[i] > 0) {
            y[i] = x[i];
            mask_[i] = 1;
        } else {
            y[i] = slope_ * x[i];
        }
    }
    return y;
}

Tensor LeakyReLU::backward(const Tensor& gy) {
    Tensor gx(gy.shape());
    for (std::int64_t i = 0; i < gy.numel(); ++i) gx[i] = mask_[i] ? gy[i] : slope_ * gy[i];
    return gx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    y_cache_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& gy) {
    Tensor gx(gy.shape());
    for (std::int64_t i = 0; i < gy.numel(); ++i) gx[i] = gy[i] * y_cache_[i] * (1.0 - y_cache_[i]);
    return gx;
}

// ---------------------------------------------------------------- concat --

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_4d(a, "concat_channels");
    require_4d(b, "concat_channels");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw std::invalid_argument("concat_channels: spatial mismatch " + a.shape_str() + " vs " + b.shape_str());
    const int N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2), W = a.dim(3);
    Tensor y({N, Ca + Cb, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int n = 0; n < N; ++n) {
        std::copy(a.data() + static_cast<std::size_t>(n) * Ca * plane,
                  a.data() + static_cast<std::size_t>(n + 1) * Ca * plane,
                  y.data() + static_cast<std::size_t>(n) * (Ca + Cb) * plane);
        std::copy(b.data() + static_cast<std::size_t>(n) * Cb * plane,
                  b.data() + static_cast<std::size_t>(n + 1) * Cb * plane,
                  y.data() + (static_cast<std::size_t>(n) * (Ca + Cb) + Ca) * plane);
    }
    return y;
}

void split_channels(const Tensor& g, int c_first, Tensor& ga, Tensor& gb) {
    const int N = g.dim(0), C = g.dim(1), H = g.dim(2), W = g.dim(3);
    const int Cb = C - c_first;
    ga = Tensor({N, c_first, H, W});
    gb = Tensor({N, Cb, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int n = 0; n < N; ++n) {
        std::copy(g.data() + static_cast<std::size_t>(n) * C * plane,
                  g.data() + (static_cast<std::size_t>(n) * C + c_first) * plane,
                  ga.data() + static_cast<std::size_t>(n) * c_first * plane);
        std::copy(g.data() + (static_cast<std::size_t>(n) * C + c_first) * plane,
                  g.data() + static_cast<std::size_t>(n + 1) * C * plane,
                  gb.data() + static_cast<std::size_t>(n) * Cb * plane);
    }
}

}  // namespace octorad::nn
