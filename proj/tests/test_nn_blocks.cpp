#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers/oracles.hpp"
#include "helpers/plain_unet.hpp"
#include "octorad/nn/fcn.hpp"

using namespace octorad;
using namespace octorad::nn;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

Tensor direct_avgpool(const Tensor& x) {
    Tensor y({x.dim(0), x.dim(1), x.dim(2) / 2, x.dim(3) / 2});
    for (int n = 0; n < x.dim(0); ++n)
        for (int c = 0; c < x.dim(1); ++c)
            for (int h = 0; h < y.dim(2); ++h)
                for (int w = 0; w < y.dim(3); ++w)
                    y.at(n, c, h, w) = 0.25 * (x.at(n, c, 2 * h, 2 * w) + x.at(n, c, 2 * h, 2 * w + 1) +
                                               x.at(n, c, 2 * h + 1, 2 * w) + x.at(n, c, 2 * h + 1, 2 * w + 1));
    return y;
}

Tensor direct_upsample(const Tensor& x) {
    Tensor y({x.dim(0), x.dim(1), x.dim(2) * 2, x.dim(3) * 2});
    for (int n = 0; n < x.dim(0); ++n)
        for (int c = 0; c < x.dim(1); ++c)
            for (int h = 0; h < y.dim(2); ++h)
                for (int w = 0; w < y.dim(3); ++w) y.at(n, c, h, w) = x.at(n, c, h / 2, w / 2);
    return y;
}

}  // namespace

TEST_CASE("octconv with alpha 0 reduces to a plain convolution") {
    Rng rng(101);
    OctaveConv2d oct(5, 7, 0.0, 0.0);
    oct.init(rng);
    for (int trial = 0; trial < 100; ++trial) {
        Tensor x = random_tensor({1, 5, 10, 12}, rng);
        OctTensor ox = OctTensor::from_plain(x);
        OctTensor y = oct.forward(ox);
        CHECK(!y.has_low());
        Tensor ref = oracles::direct_conv(x, oct.hh.w, oct.hh.b, 1, 1, 1);
        CHECK(oracles::max_abs_diff(y.high, ref) < 1e-5);
    }
}

TEST_CASE("octconv halving rule: low branch runs at half resolution") {
    Rng rng(102);
    OctaveConv2d oct(8, 8, 0.5, 0.5);
    oct.init(rng);
    OctTensor x;
    x.high = random_tensor({1, 4, 16, 16}, rng);
    x.low = random_tensor({1, 4, 8, 8}, rng);
    OctTensor y = oct.forward(x);
    CHECK(y.high.dim(2) == 16);
    CHECK(y.low.dim(2) == 8);
    CHECK(y.low.dim(3) == 8);
    CHECK(y.high.dim(1) + y.low.dim(1) == 8);

    // plain high input, split output: low is still half resolution
    OctaveConv2d stem(8, 8, 0.0, 0.5);
    stem.init(rng);
    OctTensor xs = OctTensor::from_plain(random_tensor({1, 8, 16, 16}, rng));
    OctTensor ys = stem.forward(xs);
    CHECK(ys.low.dim(2) == 8);
    CHECK(ys.low.dim(3) == 8);
}

TEST_CASE("octconv four-path sum matches a direct re-implementation") {
    Rng rng(103);
    OctaveConv2d oct(4, 6, 0.5, 0.5);
    oct.init(rng);

    OctTensor x;
    x.high = Tensor::full({1, 2, 8, 8}, 1.0);
    x.low = Tensor::full({1, 2, 4, 4}, 1.0);
    // keep the all-ones case from the contract, then三 random ones
    for (int trial = 0; trial < 4; ++trial) {
        if (trial > 0) {
            x.high = random_tensor({1, 2, 8, 8}, rng);
            x.low = random_tensor({1, 2, 4, 4}, rng);
        }
        OctTensor y = oct.forward(x);

        Tensor ref_high = oracles::direct_conv(x.high, oct.hh.w, oct.hh.b, 1, 1, 1);
        Tensor lh = direct_upsample(oracles::direct_conv(x.low, oct.lh.w, Tensor{}, 1, 1, 1));
        for (std::int64_t i = 0; i < ref_high.numel(); ++i) ref_high[i] += lh[i];

        Tensor ref_low = oracles::direct_conv(x.low, oct.ll.w, oct.ll.b, 1, 1, 1);
        Tensor hl = oracles::direct_conv(direct_avgpool(x.high), oct.hl.w, Tensor{}, 1, 1, 1);
        for (std::int64_t i = 0; i < ref_low.numel(); ++i) ref_low[i] += hl[i];

        CHECK(oracles::max_abs_diff(y.high, ref_high) < 1e-12);
        CHECK(oracles::max_abs_diff(y.low, ref_low) < 1e-12);
    }
}

TEST_CASE("octconv rejects odd spatial dims when a low branch is involved") {
    Rng rng(104);
    OctaveConv2d oct(4, 4, 0.0, 0.5);
    oct.init(rng);
    OctTensor x = OctTensor::from_plain(random_tensor({1, 4, 7, 8}, rng));
    CHECK_THROWS_AS(oct.forward(x), std::invalid_argument);

    OctTensor bad;
    bad.high = random_tensor({1, 2, 9, 9}, rng);
    bad.low = random_tensor({1, 2, 4, 4}, rng);
    OctaveConv2d oct2(4, 4, 0.5, 0.5);
    oct2.init(rng);
    CHECK_THROWS_AS(oct2.forward(bad), std::invalid_argument);
}

TEST_CASE("octconv gradients pass finite differences") {
    Rng rng(105);
    OctaveConv2d oct(4, 4, 0.5, 0.5);
    oct.init(rng);
    OctTensor x;
    x.high = random_tensor({1, 2, 8, 8}, rng);
    x.low = random_tensor({1, 2, 4, 4}, rng);

    OctTensor y = oct.forward(x);
    Tensor proj_h = oracles::make_projection(y.high, rng);
    Tensor proj_l = oracles::make_projection(y.low, rng);

    OctTensor gy;
    gy.high = proj_h;
    gy.low = proj_l;
    oct.forward(x);
    OctTensor gx = oct.backward(gy);

    auto loss_high = [&](const Tensor& xh) {
        OctaveConv2d c2 = oct;
        OctTensor xi;
        xi.high = xh;
        xi.low = x.low;
        OctTensor yy = c2.forward(xi);
        return oracles::dot(yy.high, proj_h) + oracles::dot(yy.low, proj_l);
    };
    CHECK(oracles::gradcheck(loss_high, x.high, gx.high) < 1e-7);

    auto loss_low = [&](const Tensor& xl) {
        OctaveConv2d c2 = oct;
        OctTensor xi;
        xi.high = x.high;
        xi.low = xl;
        OctTensor yy = c2.forward(xi);
        return oracles::dot(yy.high, proj_h) + oracles::dot(yy.low, proj_l);
    };
    CHECK(oracles::gradcheck(loss_low, x.low, gx.low) < 1e-7);
}

TEST_CASE("scse gate limits") {
    Rng rng(201);
    ScSE scse(4, 2);
    scse.init(rng);
    Tensor x = random_tensor({2, 4, 5, 5}, rng);

    scse.force_channel_gates = 1.0;
    scse.force_spatial_gates = 1.0;
    Tensor y1 = scse.forward(x);
    CHECK(oracles::max_abs_diff(y1, x) == 0.0);

    scse.force_channel_gates = 0.0;
    scse.force_spatial_gates = 0.0;
    Tensor y0 = scse.forward(x);
    for (std::int64_t i = 0; i < y0.numel(); ++i) CHECK(y0[i] == 0.0);
}

TEST_CASE("scse output magnitude never exceeds input magnitude") {
    Rng rng(202);
    ScSE scse(6, 2);
    scse.init(rng);
    for (int trial = 0; trial < 1000; ++trial) {
        Tensor x = random_tensor({1, 6, 4, 4}, rng, -3.0, 3.0);
        Tensor y = scse.forward(x);
        for (std::int64_t i = 0; i < x.numel(); ++i) {
            CHECK(std::abs(y[i]) <= std::abs(x[i]) + 1e-12);
        }
    }
}

TEST_CASE("scse gradients pass finite differences") {
    Rng rng(203);
    ScSE scse(4, 2);
    scse.init(rng);
    Tensor x = random_tensor({1, 4, 5, 5}, rng);
    Tensor y = scse.forward(x);
    Tensor proj = oracles::make_projection(y, rng);
    scse.forward(x);
    Tensor gx = scse.backward(proj);
    auto loss = [&](const Tensor& xv) {
        ScSE s2 = scse;
        return oracles::dot(s2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss, x, gx) < 1e-6);
}

TEST_CASE("skip-scse is exactly the identity when gates are forced to zero") {
    Rng rng(301);
    SkipScSE block(6, 2);
    block.init(rng);
    block.scse.force_channel_gates = 0.0;
    block.scse.force_spatial_gates = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Tensor x = random_tensor({1, 6, 5, 4}, rng, -2.0, 2.0);
        Tensor y = block.forward(x);
        for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == x[i]);
    }
}

TEST_CASE("skip-scse doubles the input with identity inner weights and unit gates") {
    Rng rng(302);
    SkipScSE block(6, 2);
    block.init(rng);
    block.make_inner_identity();
    block.scse.force_channel_gates = 1.0;
    block.scse.force_spatial_gates = 1.0;
    Tensor x = random_tensor({2, 6, 3, 3}, rng);
    Tensor y = block.forward(x);
    for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == doctest::Approx(2.0 * x[i]).epsilon(1e-12));
}

TEST_CASE("skip-scse gradients pass finite differences") {
    Rng rng(303);
    SkipScSE block(4, 2);
    block.init(rng);
    Tensor x = random_tensor({1, 4, 4, 4}, rng);
    Tensor y = block.forward(x);
    Tensor proj = oracles::make_projection(y, rng);
    block.forward(x);
    Tensor gx = block.backward(proj);
    auto loss = [&](const Tensor& xv) {
        SkipScSE b2 = block;
        return oracles::dot(b2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss, x, gx) < 1e-6);
}

TEST_CASE("encoder block shape contract") {
    Rng rng(401);
    EncoderBlock block(16, 16, 0.25, 0.25, 0.25);
    block.init(rng);
    OctTensor x;
    x.high = random_tensor({1, 12, 64, 64}, rng);
    x.low = random_tensor({1, 4, 32, 32}, rng);
    auto out = block.forward(x);
    CHECK(out.skip.high.dim(1) + out.skip.low.dim(1) == 16);
    CHECK(out.skip.high.dim(2) == 64);
    CHECK(out.down.high.dim(2) == 32);
    CHECK(out.down.low.dim(2) == 16);
}

TEST_CASE("four stacked encoder blocks bring 240x240 down to 15x15") {
    Rng rng(402);
    // deepest block folds the low branch back into the high branch
    std::vector<EncoderBlock> blocks;
    blocks.emplace_back(3, 4, 0.0, 0.25, 0.25);
    blocks.emplace_back(4, 4, 0.25, 0.25, 0.25);
    blocks.emplace_back(4, 4, 0.25, 0.25, 0.25);
    blocks.emplace_back(4, 4, 0.25, 0.25, 0.0);
    for (auto& b : blocks) b.init(rng);

    OctTensor cur = OctTensor::from_plain(random_tensor({1, 3, 240, 240}, rng));
    for (auto& b : blocks) cur = b.forward(cur).down;
    CHECK(cur.high.dim(2) == 15);
    CHECK(cur.high.dim(3) == 15);
    CHECK(!cur.has_low());
}

TEST_CASE("encoder block rejects indivisible spatial dims") {
    Rng rng(403);
    EncoderBlock block(4, 4, 0.0, 0.25, 0.25);
    block.init(rng);
    OctTensor odd = OctTensor::from_plain(random_tensor({1, 4, 30, 30}, rng));
    // 30 is divisible by 2 but not by 4; the block would emit an unpoolable low branch
    CHECK_THROWS_AS(block.forward(odd), std::invalid_argument);

    EncoderBlock merging(4, 4, 0.0, 0.25, 0.0);
    merging.init(rng);
    auto out = merging.forward(odd);
    CHECK(out.down.high.dim(2) == 15);
}

TEST_CASE("encoder block gradients pass finite differences") {
    Rng rng(404);
    EncoderBlock block(2, 4, 0.0, 0.25, 0.25);
    block.init(rng);
    Tensor x = random_tensor({1, 2, 8, 8}, rng);

    auto run = [&](EncoderBlock& b, const Tensor& xv) { return b.forward(OctTensor::from_plain(xv)); };
    auto out = run(block, x);
    Tensor pj_sh = oracles::make_projection(out.skip.high, rng);
    Tensor pj_sl = oracles::make_projection(out.skip.low, rng);
    Tensor pj_dh = oracles::make_projection(out.down.high, rng);
    Tensor pj_dl = oracles::make_projection(out.down.low, rng);

    run(block, x);
    OctTensor g_skip, g_down;
    g_skip.high = pj_sh;
    g_skip.low = pj_sl;
    g_down.high = pj_dh;
    g_down.low = pj_dl;
    OctTensor gx = block.backward(g_skip, g_down);

    auto loss = [&](const Tensor& xv) {
        EncoderBlock b2 = block;
        auto o = run(b2, xv);
        return oracles::dot(o.skip.high, pj_sh) + oracles::dot(o.skip.low, pj_sl) + oracles::dot(o.down.high, pj_dh) +
               oracles::dot(o.down.low, pj_dl);
    };
    CHECK(oracles::gradcheck(loss, x, gx.high) < 1e-6);
}

TEST_CASE("decoder block shape contract and skip mismatch rejection") {
    Rng rng(501);
    DecoderBlock block(32, 32, 16, 2, true);
    block.init(rng);
    Tensor x = random_tensor({1, 32, 16, 16}, rng);
    Tensor skip = random_tensor({1, 32, 16, 16}, rng);
    Tensor y = block.forward(x, &skip, true);
    CHECK(y.dim(1) == 16);
    CHECK(y.dim(2) == 32);
    CHECK(y.dim(3) == 32);

    Tensor bad = random_tensor({1, 32, 8, 8}, rng);
    CHECK_THROWS_AS(block.forward(x, &bad, true), std::invalid_argument);
}

TEST_CASE("decoder block with zeroed skip and zero gates matches a layer-by-layer oracle") {
    Rng rng(502);
    DecoderBlock block(4, 4, 4, 2, true);
    block.init(rng);
    block.scse.scse.force_channel_gates = 0.0;
    block.scse.scse.force_spatial_gates = 0.0;

    Tensor x = random_tensor({1, 4, 6, 6}, rng);
    Tensor zeros({1, 4, 6, 6});
    Tensor y = block.forward(x, &zeros, false);

    // oracle: deconv(lrelu(bn_eval(conv(cat(x, 0))))), skip-scSE being identity
    Tensor h({1, 8, 6, 6});
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 36; ++i) h.data()[c * 36 + i] = x.data()[c * 36 + i];
    h = oracles::direct_conv(h, block.conv.w, block.conv.b, 1, 1, 1);
    h = plain_unet::bn_eval(h, block.bn.gamma, block.bn.beta, block.bn.running_mean, block.bn.running_var);
    h = plain_unet::leaky(h, 0.01);
    Tensor ref = oracles::direct_conv_transpose(h, block.deconv.w, block.deconv.b, 2, 1);
    CHECK(oracles::max_abs_diff(y, ref) < 1e-12);
}

TEST_CASE("decoder block gradients pass finite differences") {
    Rng rng(503);
    DecoderBlock block(3, 3, 4, 2, true);
    block.init(rng);
    Tensor x = random_tensor({1, 3, 6, 6}, rng);
    Tensor skip = random_tensor({1, 3, 6, 6}, rng);

    Tensor y = block.forward(x, &skip, true);
    Tensor proj = oracles::make_projection(y, rng);
    block.forward(x, &skip, true);
    auto [gx, gskip] = block.backward(proj);

    auto loss_x = [&](const Tensor& xv) {
        DecoderBlock b2 = block;
        return oracles::dot(b2.forward(xv, &skip, true), proj);
    };
    CHECK(oracles::gradcheck(loss_x, x, gx) < 1e-6);

    auto loss_s = [&](const Tensor& sv) {
        DecoderBlock b2 = block;
        return oracles::dot(b2.forward(x, &sv, true), proj);
    };
    CHECK(oracles::gradcheck(loss_s, skip, gskip) < 1e-6);
}

TEST_CASE("fcn shape preservation at depth 4 on 240x240") {
    Rng rng(601);
    FcnConfig cfg;
    cfg.in_channels = 3;
    cfg.out_channels = 4;
    cfg.depth = 4;
    cfg.base_channels = 4;
    cfg.alpha = 0.25;
    OctFcn net(cfg);
    net.init(rng);
    Tensor x = random_tensor({1, 3, 240, 240}, rng);
    Tensor y = net.forward(x, false);
    CHECK(y.dim(1) == 4);
    CHECK(y.dim(2) == 240);
    CHECK(y.dim(3) == 240);

    Tensor bad = random_tensor({1, 3, 36, 36}, rng);
    CHECK_THROWS_AS(net.forward(bad, false), std::invalid_argument);
}

TEST_CASE("fcn forward is deterministic in eval mode") {
    Rng rng(602);
    FcnConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 4;
    OctFcn net(cfg);
    net.init(rng);
    Tensor x = random_tensor({2, 3, 32, 32}, rng);
    Tensor y1 = net.forward(x, false);
    Tensor y2 = net.forward(x, false);
    CHECK(oracles::max_abs_diff(y1, y2) == 0.0);
}

TEST_CASE("depth-1 alpha-0 fcn matches the independently coded plain unet") {
    Rng rng(603);
    FcnConfig cfg;
    cfg.in_channels = 2;
    cfg.out_channels = 3;
    cfg.depth = 1;
    cfg.base_channels = 4;
    cfg.alpha = 0.0;
    OctFcn net(cfg);
    net.init(rng);

    plain_unet::WeightMap weights;
    for (auto& [name, t] : net.state()) weights[name] = *t;

    Tensor x = random_tensor({1, 2, 16, 16}, rng);
    Tensor y = net.forward(x, false);
    Tensor ref = plain_unet::forward(x, weights, cfg.depth);
    CHECK(oracles::max_abs_diff(y, ref) < 1e-5);

    // depth 2 as well
    cfg.depth = 2;
    OctFcn net2(cfg);
    net2.init(rng);
    plain_unet::WeightMap weights2;
    for (auto& [name, t] : net2.state()) weights2[name] = *t;
    Tensor y2 = net2.forward(x, false);
    Tensor ref2 = plain_unet::forward(x, weights2, 2);
    CHECK(oracles::max_abs_diff(y2, ref2) < 1e-5);
}

TEST_CASE("fcn parameter count equals the closed-form hand count") {
    FcnConfig cfg;
    cfg.in_channels = 3;
    cfg.out_channels = 4;
    cfg.depth = 2;
    cfg.base_channels = 4;
    cfg.alpha = 0.25;
    cfg.se_reduction = 2;
    OctFcn net(cfg);

    // octave conv with at least one input branch spans all paths: 9*in*out weights + out biases
    auto octconv = [](int in, int out) { return 9 * in * out + out; };
    auto encoder = [&](int in, int out) { return octconv(in, out) + octconv(out, out); };
    auto skip_scse = [&](int c, int r) {
        const std::int64_t inner = c * (c / 2) + c;
        const std::int64_t fc1 = (c / r) * c + c / r;
        const std::int64_t fc2 = c * (c / r) + c;
        const std::int64_t spatial = c + 1;
        return inner + fc1 + fc2 + spatial;
    };
    auto decoder = [&](int x_ch, int skip_ch, int out, bool deconv) {
        std::int64_t n = 9 * (x_ch + skip_ch) * out + out;  // conv
        n += 2 * out;                                       // batch norm affine
        n += skip_scse(out, cfg.se_reduction);
        if (deconv) n += 16 * out * out + out;
        return n;
    };

    const int c0 = 4, c1 = 8;
    std::int64_t expected = 0;
    expected += encoder(3, c0);            // enc0
    expected += encoder(c0, c1);           // enc1 (merges at its second conv)
    expected += decoder(c1, 0, c1, true);  // bridge
    expected += decoder(c1, c1, c0, true);
    expected += decoder(c0, c0, c0, false);
    expected += c0 * 4 + 4;  // final 1x1
    CHECK(net.parameter_count() == expected);
}

TEST_CASE("channel split arithmetic holds inside a built fcn") {
    FcnConfig cfg;
    cfg.depth = 3;
    cfg.base_channels = 8;
    cfg.alpha = 0.25;
    OctFcn net(cfg);
    for (std::size_t i = 0; i < net.encoders.size(); ++i) {
        const auto& e = net.encoders[i];
        CHECK(e.oc1.in_high() + e.oc1.in_low() == (i == 0 ? cfg.in_channels : (cfg.base_channels << (i - 1))));
        CHECK(e.oc1.out_high() + e.oc1.out_low() == (cfg.base_channels << i));
        CHECK(e.oc2.out_high() + e.oc2.out_low() == (cfg.base_channels << i));
    }
}

TEST_CASE("fcn input gradient passes finite differences") {
    Rng rng(604);
    FcnConfig cfg;
    cfg.in_channels = 2;
    cfg.out_channels = 2;
    cfg.depth = 2;
    cfg.base_channels = 4;
    cfg.alpha = 0.25;
    OctFcn net(cfg);
    net.init(rng);
    Tensor x = random_tensor({1, 2, 8, 8}, rng);
    Tensor y = net.forward(x, true);
    Tensor proj = oracles::make_projection(y, rng);
    net.forward(x, true);
    Tensor gx = net.backward(proj);
    auto loss = [&](const Tensor& xv) {
        OctFcn n2 = net;
        return oracles::dot(n2.forward(xv, true), proj);
    };
    CHECK(oracles::gradcheck(loss, x, gx) < 1e-5);
}
