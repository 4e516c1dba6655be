#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers/oracles.hpp"
#include "octorad/nn/layers.hpp"

using namespace octorad;
using namespace octorad::nn;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace

TEST_CASE("conv2d matches direct convolution") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        Conv2d conv(6, 4, 3, 1, 1, 1, true);
        conv.init(rng);
        Tensor x = random_tensor({2, 6, 9, 7}, rng);
        Tensor y = conv.forward(x);
        Tensor ref = oracles::direct_conv(x, conv.w, conv.b, 1, 1, 1);
        CHECK(oracles::max_abs_diff(y, ref) < 1e-12);
    }
}

TEST_CASE("conv2d grouped matches direct convolution") {
    Rng rng(7);
    Conv2d conv(8, 8, 1, 1, 0, 2, true);
    conv.init(rng);
    Tensor x = random_tensor({1, 8, 5, 5}, rng);
    Tensor y = conv.forward(x);
    Tensor ref = oracles::direct_conv(x, conv.w, conv.b, 1, 0, 2);
    CHECK(oracles::max_abs_diff(y, ref) < 1e-12);
}

TEST_CASE("conv transpose matches direct transposed convolution") {
    Rng rng(11);
    ConvTranspose2d up(5, 3, 4, 2, 1, true);
    up.init(rng);
    Tensor x = random_tensor({2, 5, 6, 4}, rng);
    Tensor y = up.forward(x);
    CHECK(y.dim(2) == 12);
    CHECK(y.dim(3) == 8);
    Tensor ref = oracles::direct_conv_transpose(x, up.w, up.b, 2, 1);
    CHECK(oracles::max_abs_diff(y, ref) < 1e-12);
}

TEST_CASE("conv2d gradients pass finite differences") {
    Rng rng(3);
    Conv2d conv(3, 4, 3, 1, 1, 1, true);
    conv.init(rng);
    Tensor x = random_tensor({2, 3, 6, 5}, rng);
    Tensor proj = oracles::make_projection(conv.forward(x), rng);

    conv.gw.fill(0.0);
    conv.gb.fill(0.0);
    conv.forward(x);
    Tensor gx = conv.backward(proj);

    auto loss_x = [&](const Tensor& xv) {
        Conv2d c2 = conv;
        return oracles::dot(c2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss_x, x, gx) < 1e-7);

    auto loss_w = [&](const Tensor& wv) {
        Conv2d c2 = conv;
        c2.w = wv;
        return oracles::dot(c2.forward(x), proj);
    };
    CHECK(oracles::gradcheck(loss_w, conv.w, conv.gw) < 1e-7);

    auto loss_b = [&](const Tensor& bv) {
        Conv2d c2 = conv;
        c2.b = bv;
        return oracles::dot(c2.forward(x), proj);
    };
    CHECK(oracles::gradcheck(loss_b, conv.b, conv.gb) < 1e-7);
}

TEST_CASE("conv transpose gradients pass finite differences") {
    Rng rng(5);
    ConvTranspose2d up(3, 2, 4, 2, 1, true);
    up.init(rng);
    Tensor x = random_tensor({1, 3, 4, 4}, rng);
    Tensor proj = oracles::make_projection(up.forward(x), rng);

    up.gw.fill(0.0);
    up.gb.fill(0.0);
    up.forward(x);
    Tensor gx = up.backward(proj);

    auto loss_x = [&](const Tensor& xv) {
        ConvTranspose2d c2 = up;
        return oracles::dot(c2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss_x, x, gx) < 1e-7);

    auto loss_w = [&](const Tensor& wv) {
        ConvTranspose2d c2 = up;
        c2.w = wv;
        return oracles::dot(c2.forward(x), proj);
    };
    CHECK(oracles::gradcheck(loss_w, up.w, up.gw) < 1e-7);
}

TEST_CASE("max pool forward/backward") {
    Rng rng(9);
    Tensor x = random_tensor({1, 2, 4, 4}, rng);
    MaxPool2x2 pool;
    Tensor y = pool.forward(x);
    CHECK(y.dim(2) == 2);

    Tensor proj = oracles::make_projection(y, rng);
    Tensor gx = pool.backward(proj);
    auto loss = [&](const Tensor& xv) {
        MaxPool2x2 p2;
        return oracles::dot(p2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss, x, gx) < 1e-7);

    Tensor odd({1, 1, 3, 4});
    CHECK_THROWS_AS(pool.forward(odd), std::invalid_argument);
}

TEST_CASE("avg pool and nearest upsample are adjoint-consistent") {
    Rng rng(13);
    Tensor x = random_tensor({2, 3, 6, 6}, rng);
    AvgPool2x2 pool;
    Tensor y = pool.forward(x);
    Tensor proj = oracles::make_projection(y, rng);
    Tensor gx = pool.backward(proj);
    auto loss = [&](const Tensor& xv) {
        AvgPool2x2 p2;
        return oracles::dot(p2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss, x, gx) < 1e-7);

    UpsampleNearest2x up;
    Tensor yu = up.forward(x);
    CHECK(yu.dim(2) == 12);
    for (int h = 0; h < 12; ++h)
        for (int w = 0; w < 12; ++w) CHECK(yu.at(0, 0, h, w) == x.at(0, 0, h / 2, w / 2));
    Tensor proj_u = oracles::make_projection(yu, rng);
    Tensor gxu = up.backward(proj_u);
    auto loss_u = [&](const Tensor& xv) {
        UpsampleNearest2x u2;
        return oracles::dot(u2.forward(xv), proj_u);
    };
    CHECK(oracles::gradcheck(loss_u, x, gxu) < 1e-7);
}

TEST_CASE("batch norm statistics and gradients") {
    Rng rng(17);
    BatchNorm2d bn(3);
    bn.init(rng);
    Tensor x = random_tensor({4, 3, 5, 5}, rng, -2.0, 3.0);

    Tensor y = bn.forward(x, true);
    // per-channel output should be standardized
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        const std::int64_t per_c = 4 * 5 * 5;
        for (int n = 0; n < 4; ++n)
            for (int h = 0; h < 5; ++h)
                for (int w = 0; w < 5; ++w) mean += y.at(n, c, h, w);
        mean /= static_cast<double>(per_c);
        for (int n = 0; n < 4; ++n)
            for (int h = 0; h < 5; ++h)
                for (int w = 0; w < 5; ++w) var += (y.at(n, c, h, w) - mean) * (y.at(n, c, h, w) - mean);
        var /= static_cast<double>(per_c);
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(var - 1.0) < 1e-4);
    }

    // gamma/beta nontrivial for the gradient check
    for (int c = 0; c < 3; ++c) {
        bn.gamma[c] = 0.5 + 0.3 * c;
        bn.beta[c] = -0.2 + 0.1 * c;
    }
    Tensor proj = oracles::make_projection(y, rng);
    bn.ggamma.fill(0.0);
    bn.gbeta.fill(0.0);
    bn.forward(x, true);
    Tensor gx = bn.backward(proj);

    auto loss_x = [&](const Tensor& xv) {
        BatchNorm2d b2 = bn;
        return oracles::dot(b2.forward(xv, true), proj);
    };
    CHECK(oracles::gradcheck(loss_x, x, gx) < 1e-6);

    auto loss_g = [&](const Tensor& gv) {
        BatchNorm2d b2 = bn;
        b2.gamma = gv;
        return oracles::dot(b2.forward(x, true), proj);
    };
    CHECK(oracles::gradcheck(loss_g, bn.gamma, bn.ggamma) < 1e-6);

    // eval mode uses running statistics and is deterministic
    Tensor e1 = bn.forward(x, false);
    Tensor e2 = bn.forward(x, false);
    CHECK(oracles::max_abs_diff(e1, e2) == 0.0);
}

TEST_CASE("activations") {
    Rng rng(23);
    Tensor x = random_tensor({1, 2, 3, 3}, rng, -2.0, 2.0);

    ReLU relu;
    Tensor y = relu.forward(x);
    for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == (x[i] > 0 ? x[i] : 0.0));

    LeakyReLU lrelu(0.01);
    Tensor yl = lrelu.forward(x);
    for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(yl[i] == doctest::Approx(x[i] > 0 ? x[i] : 0.01 * x[i]));

    Sigmoid sig;
    Tensor ys = sig.forward(x);
    Tensor proj = oracles::make_projection(ys, rng);
    Tensor gx = sig.backward(proj);
    auto loss = [&](const Tensor& xv) {
        Sigmoid s2;
        return oracles::dot(s2.forward(xv), proj);
    };
    CHECK(oracles::gradcheck(loss, x, gx) < 1e-7);
}

TEST_CASE("concat/split round trip") {
    Rng rng(29);
    Tensor a = random_tensor({2, 3, 4, 4}, rng);
    Tensor b = random_tensor({2, 5, 4, 4}, rng);
    Tensor y = concat_channels(a, b);
    CHECK(y.dim(1) == 8);
    Tensor ga, gb;
    split_channels(y, 3, ga, gb);
    CHECK(oracles::max_abs_diff(ga, a) == 0.0);
    CHECK(oracles::max_abs_diff(gb, b) == 0.0);

    Tensor c({2, 1, 5, 4});
    CHECK_THROWS_AS(concat_channels(a, c), std::invalid_argument);
}
