#include "octorad/nn/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace octorad::nn {

void OctTensor::validate(const char* where) const {
    if (!has_high() && !has_low()) throw std::invalid_argument(std::string(where) + ": empty OctTensor");
    if (has_high() && high.ndim() != 4)
        throw std::invalid_argument(std::string(where) + ": high branch not 4-D");
    if (has_low()) {
        if (low.ndim() != 4) throw std::invalid_argument(std::string(where) + ": low branch not 4-D");
        if (!has_high()) return;
        if (high.dim(2) % 2 || high.dim(3) % 2)
            throw std::invalid_argument(std::string(where) + ": odd high dims with a low branch " + high.shape_str());
        if (low.dim(2) != high.dim(2) / 2 || low.dim(3) != high.dim(3) / 2)
            throw std::invalid_argument(std::string(where) + ": low dims are not half of high dims");
        if (low.dim(0) != high.dim(0))
            throw std::invalid_argument(std::string(where) + ": batch mismatch between branches");
    }
}

// ----------------------------------------------------------- OctaveConv2d --

OctaveConv2d::OctaveConv2d(int in_ch, int out_ch, double alpha_in, double alpha_out, int k, int pad)
    : in_ch_(in_ch), out_ch_(out_ch) {
    if (alpha_in < 0 || alpha_in > 1 || alpha_out < 0 || alpha_out > 1)
        throw std::invalid_argument("OctaveConv2d: alpha outside [0,1]");
    in_l_ = low_channel_count(in_ch, alpha_in);
    in_h_ = in_ch - in_l_;
    out_l_ = low_channel_count(out_ch, alpha_out);
    out_h_ = out_ch - out_l_;

    // bias lives on one path per output branch
    if (in_h_ > 0 && out_h_ > 0) hh = Conv2d(in_h_, out_h_, k, 1, pad, 1, true);
    if (in_h_ > 0 && out_l_ > 0) hl = Conv2d(in_h_, out_l_, k, 1, pad, 1, in_l_ == 0);
    if (in_l_ > 0 && out_h_ > 0) lh = Conv2d(in_l_, out_h_, k, 1, pad, 1, in_h_ == 0);
    if (in_l_ > 0 && out_l_ > 0) ll = Conv2d(in_l_, out_l_, k, 1, pad, 1, true);
}

void OctaveConv2d::init(Rng& rng) {
    if (in_h_ > 0 && out_h_ > 0) hh.init(rng);
    if (in_h_ > 0 && out_l_ > 0) hl.init(rng);
    if (in_l_ > 0 && out_h_ > 0) lh.init(rng);
    if (in_l_ > 0 && out_l_ > 0) ll.init(rng);
}

OctTensor OctaveConv2d::forward(const OctTensor& x) {
    x.validate("OctaveConv2d");
    if (in_h_ > 0 && (!x.has_high() || x.high.dim(1) != in_h_))
        throw std::invalid_argument("OctaveConv2d: high-branch channel mismatch");
    if (in_l_ > 0 && (!x.has_low() || x.low.dim(1) != in_l_))
        throw std::invalid_argument("OctaveConv2d: low-branch channel mismatch");
    if (in_l_ == 0 && x.has_low()) throw std::invalid_argument("OctaveConv2d: unexpected low branch");
    if (out_l_ > 0 && in_h_ > 0 && (x.high.dim(2) % 2 || x.high.dim(3) % 2))
        throw std::invalid_argument("OctaveConv2d: odd spatial dims cannot feed a low branch " + x.high.shape_str());

    OctTensor y;
    if (out_h_ > 0) {
        if (in_h_ > 0) y.high = hh.forward(x.high);
        if (in_l_ > 0) {
            Tensor up = up_.forward(lh.forward(x.low));
            if (y.high.empty()) {
                y.high = std::move(up);
            } else {
                check_same_shape(y.high, up, "OctaveConv2d: branch sum");
                for (std::int64_t i = 0; i < up.numel(); ++i) y.high[i] += up[i];
            }
        }
    }
    if (out_l_ > 0) {
        if (in_l_ > 0) y.low = ll.forward(x.low);
        if (in_h_ > 0) {
            Tensor down = hl.forward(pool_.forward(x.high));
            if (y.low.empty()) {
                y.low = std::move(down);
            } else {
                check_same_shape(y.low, down, "OctaveConv2d: branch sum");
                for (std::int64_t i = 0; i < down.numel(); ++i) y.low[i] += down[i];
            }
        }
    }
    return y;
}

OctTensor OctaveConv2d::backward(const OctTensor& gy) {
    OctTensor gx;
    auto add_into = [](Tensor& dst, Tensor src) {
        if (dst.empty()) {
            dst = std::move(src);
        } else {
            for (std::int64_t i = 0; i < src.numel(); ++i) dst[i] += src[i];
        }
    };

    if (out_h_ > 0) {
        if (gy.high.empty()) throw std::invalid_argument("OctaveConv2d::backward: missing high gradient");
        if (in_h_ > 0) add_into(gx.high, hh.backward(gy.high));
        if (in_l_ > 0) add_into(gx.low, lh.backward(up_.backward(gy.high)));
    }
    if (out_l_ > 0) {
        if (gy.low.empty()) throw std::invalid_argument("OctaveConv2d::backward: missing low gradient");
        if (in_l_ > 0) add_into(gx.low, ll.backward(gy.low));
        if (in_h_ > 0) add_into(gx.high, pool_.backward(hl.backward(gy.low)));
    }
    return gx;
}

void OctaveConv2d::collect(const std::string& prefix, ParamList& out) {
    if (in_h_ > 0 && out_h_ > 0) hh.collect(prefix + ".hh", out);
    if (in_h_ > 0 && out_l_ > 0) hl.collect(prefix + ".hl", out);
    if (in_l_ > 0 && out_h_ > 0) lh.collect(prefix + ".lh", out);
    if (in_l_ > 0 && out_l_ > 0) ll.collect(prefix + ".ll", out);
}

// ------------------------------------------------------------------- ScSE --

ScSE::ScSE(int channels, int reduction, Combine combine)
    : channels_(channels), reduction_(reduction), combine_(combine) {
    if (reduction < 1) throw std::invalid_argument("ScSE: reduction must be >= 1");
    if (channels % reduction) throw std::invalid_argument("ScSE: channels not divisible by reduction");
    fc1 = Conv2d(channels, channels / reduction, 1, 1, 0, 1, true);
    fc2 = Conv2d(channels / reduction, channels, 1, 1, 0, 1, true);
    spatial = Conv2d(channels, 1, 1, 1, 0, 1, true);
}

void ScSE::init(Rng& rng) {
    fc1.init(rng);
    fc2.init(rng);
    spatial.init(rng);
}

Tensor ScSE::forward(const Tensor& x) {
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (C != channels_) throw std::invalid_argument("ScSE: channel mismatch");
    x_cache_ = x;

    if (force_channel_gates) {
        cgate_cache_ = Tensor::full({N, C, 1, 1}, *force_channel_gates);
    } else {
        Tensor pooled({N, C, 1, 1});
        const double inv = 1.0 / (static_cast<double>(H) * W);
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                double s = 0.0;
                for (int i = 0; i < H * W; ++i) s += xp[i];
                pooled.at(n, c, 0, 0) = s * inv;
            }
        cgate_cache_ = csig_.forward(fc2.forward(relu_.forward(fc1.forward(pooled))));
    }

    if (force_spatial_gates) {
        sgate_cache_ = Tensor::full({N, 1, H, W}, *force_spatial_gates);
    } else {
        sgate_cache_ = ssig_.forward(spatial.forward(x));
    }

    Tensor y(x.shape());
    take_channel_.assign(static_cast<std::size_t>(x.numel()), 1);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double gc = cgate_cache_.at(n, c, 0, 0);
            const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            const double* sp = sgate_cache_.data() + static_cast<std::size_t>(n) * H * W;
            double* yp = y.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            unsigned char* tp = take_channel_.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            for (int i = 0; i < H * W; ++i) {
                const double a = xp[i] * gc;
                const double b = xp[i] * sp[i];
                if (combine_ == Combine::Sum) {
                    yp[i] = a + b;
                } else if (a >= b) {
                    yp[i] = a;
                    tp[i] = 1;
                } else {
                    yp[i] = b;
                    tp[i] = 0;
                }
            }
        }
    return y;
}

Tensor ScSE::backward(const Tensor& gy) {
    const Tensor& x = x_cache_;
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);

    Tensor gx(x.shape());
    Tensor g_cgate({N, C, 1, 1});
    Tensor g_sgate({N, 1, H, W});

    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double gc = cgate_cache_.at(n, c, 0, 0);
            const double* xp = x.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            const double* sp = sgate_cache_.data() + static_cast<std::size_t>(n) * H * W;
            const double* gp = gy.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            double* gxp = gx.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            double* gsp = g_sgate.data() + static_cast<std::size_t>(n) * H * W;
            const unsigned char* tp = take_channel_.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            double gc_acc = 0.0;
            for (int i = 0; i < H * W; ++i) {
                const bool both = combine_ == Combine::Sum;
                if (both || tp[i]) {  // channel-gated branch
                    gxp[i] += gp[i] * gc;
                    gc_acc += gp[i] * xp[i];
                }
                if (both || !tp[i]) {  // spatially-gated branch
                    gxp[i] += gp[i] * sp[i];
                    gsp[i] += gp[i] * xp[i];
                }
            }
            g_cgate.at(n, c, 0, 0) = gc_acc;
        }

    if (!force_channel_gates) {
        Tensor g_pool = fc1.backward(relu_.backward(fc2.backward(csig_.backward(g_cgate))));
        const double inv = 1.0 / (static_cast<double>(H) * W);
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const double g = g_pool.at(n, c, 0, 0) * inv;
                double* gxp = gx.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                for (int i = 0; i < H * W; ++i) gxp[i] += g;
            }
    }
    if (!force_spatial_gates) {
        Tensor g_sconv = spatial.backward(ssig_.backward(g_sgate));
        for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] += g_sconv[i];
    }
    return gx;
}

void ScSE::collect(const std::string& prefix, ParamList& out) {
    fc1.collect(prefix + ".fc1", out);
    fc2.collect(prefix + ".fc2", out);
    spatial.collect(prefix + ".spatial", out);
}

// --------------------------------------------------------------- SkipScSE --

SkipScSE::SkipScSE(int channels, int reduction, ScSE::Combine combine) : channels_(channels) {
    if (channels % 2) throw std::invalid_argument("SkipScSE: channels must be even for grouped inner imaging");
    inner = Conv2d(channels, channels, 1, 1, 0, /*groups=*/2, true);
    scse = ScSE(channels, reduction, combine);
}

void SkipScSE::init(Rng& rng) {
    inner.init(rng);
    scse.init(rng);
}

void SkipScSE::make_inner_identity() {
    inner.w.fill(0.0);
    const int per_group = channels_ / 2;
    for (int c = 0; c < channels_; ++c) {
        const int within = c % per_group;
        inner.w.at(c, within, 0, 0) = 1.0;
    }
    inner.b.fill(0.0);
}

Tensor SkipScSE::forward(const Tensor& x) {
    Tensor z = inner.forward(x);
    Tensor e = scse.forward(z);
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = e[i] + x[i];
    return y;
}

Tensor SkipScSE::backward(const Tensor& gy) {
    Tensor gz = scse.backward(gy);
    Tensor gx = inner.backward(gz);
    for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] += gy[i];
    return gx;
}

void SkipScSE::collect(const std::string& prefix, ParamList& out) {
    inner.collect(prefix + ".inner", out);
    scse.collect(prefix + ".scse", out);
}

// ----------------------------------------------------------- EncoderBlock --

EncoderBlock::EncoderBlock(int in_ch, int out_ch, double alpha_in, double alpha_mid, double alpha_out)
    : alpha_out_(alpha_out) {
    oc1 = OctaveConv2d(in_ch, out_ch, alpha_in, alpha_mid);
    oc2 = OctaveConv2d(out_ch, out_ch, alpha_mid, alpha_out);
}

void EncoderBlock::init(Rng& rng) {
    oc1.init(rng);
    oc2.init(rng);
}

EncoderBlock::Outputs EncoderBlock::forward(const OctTensor& x) {
    if (x.has_high()) {
        const int H = x.high.dim(2), W = x.high.dim(3);
        if (H % 2 || W % 2)
            throw std::invalid_argument("EncoderBlock: spatial dims not divisible by 2: " + x.high.shape_str());
        if (alpha_out_ > 0 && (H % 4 || W % 4))
            throw std::invalid_argument("EncoderBlock: dims must be divisible by 4 when a low branch exists: " +
                                        x.high.shape_str());
    }

    OctTensor t = oc1.forward(x);
    if (t.has_high()) t.high = r1h_.forward(t.high);
    if (t.has_low()) t.low = r1l_.forward(t.low);
    t = oc2.forward(t);
    if (t.has_high()) t.high = r2h_.forward(t.high);
    if (t.has_low()) t.low = r2l_.forward(t.low);

    Outputs out;
    out.skip = t;
    if (t.has_high()) out.down.high = ph_.forward(t.high);
    if (t.has_low()) out.down.low = pl_.forward(t.low);
    return out;
}

OctTensor EncoderBlock::backward(const OctTensor& g_skip, const OctTensor& g_down) {
    OctTensor g;
    if (g_down.has_high()) {
        g.high = ph_.backward(g_down.high);
        if (g_skip.has_high())
            for (std::int64_t i = 0; i < g.high.numel(); ++i) g.high[i] += g_skip.high[i];
    } else if (g_skip.has_high()) {
        g.high = g_skip.high;
    }
    if (g_down.has_low()) {
        g.low = pl_.backward(g_down.low);
        if (g_skip.has_low())
            for (std::int64_t i = 0; i < g.low.numel(); ++i) g.low[i] += g_skip.low[i];
    } else if (g_skip.has_low()) {
        g.low = g_skip.low;
    }

    if (g.has_high()) g.high = r2h_.backward(g.high);
    if (g.has_low()) g.low = r2l_.backward(g.low);
    g = oc2.backward(g);
    if (g.has_high()) g.high = r1h_.backward(g.high);
    if (g.has_low()) g.low = r1l_.backward(g.low);
    return oc1.backward(g);
}

void EncoderBlock::collect(const std::string& prefix, ParamList& out) {
    oc1.collect(prefix + ".oc1", out);
    oc2.collect(prefix + ".oc2", out);
}

// ----------------------------------------------------------- DecoderBlock --

DecoderBlock::DecoderBlock(int x_ch, int skip_ch, int out_ch, int se_reduction, bool with_deconv)
    : x_ch_(x_ch), skip_ch_(skip_ch), with_deconv_(with_deconv) {
    conv = Conv2d(x_ch + skip_ch, out_ch, 3, 1, 1, 1, true);
    bn = BatchNorm2d(out_ch);
    scse = SkipScSE(out_ch, se_reduction);
    if (with_deconv) deconv = ConvTranspose2d(out_ch, out_ch, 4, 2, 1, true);
}

void DecoderBlock::init(Rng& rng) {
    conv.init(rng);
    bn.init(rng);
    scse.init(rng);
    if (with_deconv_) deconv.init(rng);
}

Tensor DecoderBlock::forward(const Tensor& x, const Tensor* skip, bool train) {
    Tensor h;
    if (skip_ch_ > 0) {
        if (!skip) throw std::invalid_argument("DecoderBlock: missing skip input");
        if (x.dim(2) != skip->dim(2) || x.dim(3) != skip->dim(3))
            throw std::invalid_argument("DecoderBlock: spatial mismatch between input " + x.shape_str() +
                                        " and skip " + skip->shape_str());
        h = concat_channels(x, *skip);
    } else {
        h = x;
    }
    h = conv.forward(h);
    h = bn.forward(h, train);
    h = act_.forward(h);
    h = scse.forward(h);
    if (with_deconv_) h = deconv.forward(h);
    return h;
}

std::pair<Tensor, Tensor> DecoderBlock::backward(const Tensor& gy) {
    Tensor g = with_deconv_ ? deconv.backward(gy) : gy;
    g = scse.backward(g);
    g = act_.backward(g);
    g = bn.backward(g);
    g = conv.backward(g);
    if (skip_ch_ > 0) {
        Tensor gx, gskip;
        split_channels(g, x_ch_, gx, gskip);
        return {std::move(gx), std::move(gskip)};
    }
    return {std::move(g), Tensor{}};
}

void DecoderBlock::collect(const std::string& prefix, ParamList& out) {
    conv.collect(prefix + ".conv", out);
    bn.collect(prefix + ".bn", out);
    scse.collect(prefix + ".scse", out);
    if (with_deconv_) deconv.collect(prefix + ".deconv", out);
}

void DecoderBlock::collect_buffers(const std::string& prefix, std::vector<std::pair<std::string, Tensor*>>& out) {
    bn.collect_buffers(prefix + ".bn", out);
}

}  // namespace octorad::nn
