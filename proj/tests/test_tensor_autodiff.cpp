#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "core/gradcheck.hpp"
#include "core/ops.hpp"
#include "doctest.h"
#include "harness/gradcheck_suite.hpp"
#include "support/rng.hpp"

using namespace gcrp;

namespace {

using D = Tensor<double>;

D rand_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    D t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

bool all_finite(const D& t) {
    for (int64_t i = 0; i < t.numel(); ++i) {
        if (!std::isfinite(t.data()[i])) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("tensor construction and invariants") {
    D t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    for (int64_t i = 0; i < 6; ++i) CHECK(t.data()[i] == 0.0);

    D f = D::full({2, 2}, 7.0);
    CHECK(f.data()[3] == 7.0);
    CHECK(D::scalar(3.5).item() == 3.5);

    CHECK_THROWS_AS(D::from({2, 2}, {1.0, 2.0, 3.0}), ValidationError);
    CHECK_THROWS_AS((D({2, -1})), ValidationError);
}

TEST_CASE("conv2d with a 1x1 kernel scales every pixel") {
    D x = D::full({1, 1, 3, 3}, 1.0);
    D w = D::from({1, 1, 1, 1}, {2.0});
    D y = conv2d(x, w, static_cast<const D*>(nullptr), 1, 0);
    CHECK(y.shape() == Shape{1, 1, 3, 3});
    for (int64_t i = 0; i < 9; ++i) CHECK(y.data()[i] == doctest::Approx(2.0));
}

TEST_CASE("conv2d with a centered identity kernel reproduces the input") {
    Rng rng(11);
    D x = rand_tensor(rng, {2, 3, 5, 5});
    D w({3, 3, 3, 3});
    for (int64_t o = 0; o < 3; ++o) w.data()[((o * 3 + o) * 3 + 1) * 3 + 1] = 1.0;
    D y = conv2d(x, w, static_cast<const D*>(nullptr), 1, 1);
    REQUIRE(y.shape() == x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == doctest::Approx(x.data()[i]));
}

TEST_CASE("conv2d matches a nested-loop reference") {
    Rng rng(42);
    const int64_t N = 1, C = 2, H = 5, W = 5, O = 3, K = 3;
    D x = rand_tensor(rng, {N, C, H, W});
    D w = rand_tensor(rng, {O, C, K, K});
    D b = rand_tensor(rng, {O});
    for (int64_t stride : {int64_t(1), int64_t(2)}) {
        for (int64_t pad : {int64_t(0), int64_t(1)}) {
            D y = conv2d(x, w, &b, stride, pad);
            const int64_t oh = (H + 2 * pad - K) / stride + 1;
            const int64_t ow = (W + 2 * pad - K) / stride + 1;
            REQUIRE(y.shape() == Shape{N, O, oh, ow});
            for (int64_t o = 0; o < O; ++o) {
                for (int64_t r = 0; r < oh; ++r) {
                    for (int64_t c = 0; c < ow; ++c) {
                        double acc = b.data()[o];
                        for (int64_t ic = 0; ic < C; ++ic) {
                            for (int64_t kr = 0; kr < K; ++kr) {
                                for (int64_t kc = 0; kc < K; ++kc) {
                                    const int64_t ir = r * stride + kr - pad;
                                    const int64_t icol = c * stride + kc - pad;
                                    if (ir < 0 || ir >= H || icol < 0 || icol >= W) continue;
                                    acc += x.data()[(ic * H + ir) * W + icol] *
                                           w.data()[((o * C + ic) * K + kr) * K + kc];
                                }
                            }
                        }
                        CHECK(y.data()[(o * oh + r) * ow + c] == doctest::Approx(acc).epsilon(1e-12));
                    }
                }
            }
        }
    }
}

TEST_CASE("conv2d rejects a channel mismatch") {
    D x({1, 2, 4, 4});
    D w({1, 3, 3, 3});
    CHECK_THROWS_AS(conv2d(x, w, static_cast<const D*>(nullptr), 1, 1), ValidationError);
}

TEST_CASE("conv2d_transpose expands a single pixel into a kernel-sized block") {
    D x = D::from({1, 1, 1, 1}, {3.5});
    D w = D::full({1, 1, 2, 2}, 1.0);
    D y = conv2d_transpose(x, w, static_cast<const D*>(nullptr), 2, 0);
    REQUIRE(y.shape() == Shape{1, 1, 2, 2});
    for (int64_t i = 0; i < 4; ++i) CHECK(y.data()[i] == doctest::Approx(3.5));
}

TEST_CASE("conv2d_transpose is the adjoint of conv2d") {
    Rng rng(7);
    const int64_t C = 2, O = 3, K = 2, S = 2;
    D w = rand_tensor(rng, {O, C, K, K});
    D x = rand_tensor(rng, {1, C, 6, 6});
    D y = rand_tensor(rng, {1, O, 3, 3});
    D cx = conv2d(x, w, static_cast<const D*>(nullptr), S, 0);
    // The forward kernel [O,C,K,K] reads as [cin,cout,k,k] for the transposed
    // direction, so the very same tensor realizes the adjoint map.
    D ty = conv2d_transpose(y, w, static_cast<const D*>(nullptr), S, 0);
    REQUIRE(ty.shape() == x.shape());
    double lhs = 0, rhs = 0;
    for (int64_t i = 0; i < cx.numel(); ++i) lhs += cx.data()[i] * y.data()[i];
    for (int64_t i = 0; i < x.numel(); ++i) rhs += x.data()[i] * ty.data()[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("conv2d_transpose of a zero map is zero") {
    D x({1, 2, 3, 3});
    Rng rng(3);
    D w = rand_tensor(rng, {2, 2, 2, 2});
    D y = conv2d_transpose(x, w, static_cast<const D*>(nullptr), 2, 0);
    for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.data()[i] == 0.0);
}

TEST_CASE("depthwise_conv2d applies one kernel per channel") {
    Rng rng(5);
    D x = rand_tensor(rng, {1, 2, 4, 4});

    // Identity kernels reproduce the input.
    D wi({2, 1, 3, 3});
    wi.data()[1 * 3 + 1] = 1.0;
    wi.data()[9 + 1 * 3 + 1] = 1.0;
    D yi = depthwise_conv2d(x, wi, static_cast<const D*>(nullptr));
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(yi.data()[i] == doctest::Approx(x.data()[i]));

    // Zeroing channel 1's kernel silences only that channel.
    D wz = wi.detached();
    for (int64_t k = 0; k < 9; ++k) wz.data()[9 + k] = 0.0;
    D yz = depthwise_conv2d(x, wz, static_cast<const D*>(nullptr));
    for (int64_t i = 0; i < 16; ++i) {
        CHECK(yz.data()[i] == doctest::Approx(x.data()[i]));
        CHECK(yz.data()[16 + i] == 0.0);
    }
}

TEST_CASE("depthwise_conv2d matches a grouped-loop reference") {
    Rng rng(21);
    const int64_t C = 3, H = 5, W = 4, K = 3, pad = 1;
    D x = rand_tensor(rng, {1, C, H, W});
    D w = rand_tensor(rng, {C, 1, K, K});
    D b = rand_tensor(rng, {C});
    D y = depthwise_conv2d(x, w, &b);
    REQUIRE(y.shape() == x.shape());
    for (int64_t c = 0; c < C; ++c) {
        for (int64_t r = 0; r < H; ++r) {
            for (int64_t col = 0; col < W; ++col) {
                double acc = b.data()[c];
                for (int64_t kr = 0; kr < K; ++kr) {
                    for (int64_t kc = 0; kc < K; ++kc) {
                        const int64_t ir = r + kr - pad, ic = col + kc - pad;
                        if (ir < 0 || ir >= H || ic < 0 || ic >= W) continue;
                        acc += x.data()[(c * H + ir) * W + ic] * w.data()[(c * K + kr) * K + kc];
                    }
                }
                CHECK(y.data()[(c * H + r) * W + col] == doctest::Approx(acc).epsilon(1e-12));
            }
        }
    }
    D wbad({C + 1, 1, K, K});
    CHECK_THROWS_AS(depthwise_conv2d(x, wbad, static_cast<const D*>(nullptr)), ValidationError);
}

TEST_CASE("activation definitions at pinned points") {
    D x = D::from({4}, {-2.0, -0.5, 0.0, 1.5});
    D lr = leaky_relu(x, 0.01);
    CHECK(lr.data()[0] == doctest::Approx(-0.02));
    CHECK(lr.data()[2] == 0.0);
    CHECK(lr.data()[3] == doctest::Approx(1.5));

    D e = elu(x);
    CHECK(e.data()[0] == doctest::Approx(std::exp(-2.0) - 1.0));
    CHECK(e.data()[3] == doctest::Approx(1.5));

    D s = sigmoid(x);
    CHECK(s.data()[2] == doctest::Approx(0.5));
    D si = silu(x);
    CHECK(si.data()[3] == doctest::Approx(1.5 / (1.0 + std::exp(-1.5))));
    D sp = softplus(x);
    CHECK(sp.data()[1] == doctest::Approx(std::log1p(std::exp(-0.5))));
}

TEST_CASE("softmax of a uniform vector is uniform and rows sum to one") {
    D u = D::full({4}, 1.7);
    D su = softmax(u, 0);
    for (int64_t i = 0; i < 4; ++i) CHECK(su.data()[i] == doctest::Approx(0.25));

    Rng rng(9);
    D x = rand_tensor(rng, {5, 7}, -4.0, 4.0);
    D sx = softmax(x, 1);
    for (int64_t r = 0; r < 5; ++r) {
        double row = 0;
        for (int64_t c = 0; c < 7; ++c) {
            row += sx.data()[r * 7 + c];
            CHECK(sx.data()[r * 7 + c] > 0.0);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("layer_norm output has zero mean and unit variance per slice") {
    Rng rng(13);
    D x = rand_tensor(rng, {2, 6, 3, 3}, -3.0, 3.0);
    D y = layer_norm(x, 1);
    const int64_t C = 6, HW = 9;
    for (int64_t b = 0; b < 2; ++b) {
        for (int64_t p = 0; p < HW; ++p) {
            double mean = 0, var = 0;
            for (int64_t c = 0; c < C; ++c) mean += y.data()[(b * C + c) * HW + p];
            mean /= static_cast<double>(C);
            for (int64_t c = 0; c < C; ++c) {
                const double d = y.data()[(b * C + c) * HW + p] - mean;
                var += d * d;
            }
            var /= static_cast<double>(C);
            CHECK(std::abs(mean) <= 1e-5);
            CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("resize to the same size is the identity") {
    Rng rng(17);
    D x = rand_tensor(rng, {1, 2, 4, 5});
    D yn = resize_nearest(x, 4, 5);
    D yb = resize_bilinear(x, 4, 5);
    for (int64_t i = 0; i < x.numel(); ++i) {
        CHECK(yn.data()[i] == x.data()[i]);
        CHECK(yb.data()[i] == doctest::Approx(x.data()[i]));
    }
}

TEST_CASE("resizing a constant map keeps the constant") {
    D x = D::full({1, 1, 3, 3}, 0.375);
    for (auto dims : {std::pair<int64_t, int64_t>{7, 2}, {1, 9}, {6, 6}}) {
        D yb = resize_bilinear(x, dims.first, dims.second);
        D yn = resize_nearest(x, dims.first, dims.second);
        for (int64_t i = 0; i < yb.numel(); ++i) {
            CHECK(yb.data()[i] == doctest::Approx(0.375));
            CHECK(yn.data()[i] == 0.375);
        }
    }
}

TEST_CASE("bilinear upsample matches the half-pixel interpolation formula") {
    D x = D::from({1, 1, 2, 2}, {0.0, 1.0, 2.0, 3.0});
    D y = resize_bilinear(x, 4, 4);
    auto ref = [&](int64_t r, int64_t c) {
        auto axis = [](int64_t d) {
            double src = (static_cast<double>(d) + 0.5) * 0.5 - 0.5;
            src = std::max(0.0, std::min(1.0, src));
            return src;
        };
        const double sy = axis(r), sx = axis(c);
        const int64_t y0 = static_cast<int64_t>(sy), x0 = static_cast<int64_t>(sx);
        const int64_t y1 = std::min<int64_t>(1, y0 + 1), x1 = std::min<int64_t>(1, x0 + 1);
        const double wy = sy - y0, wx = sx - x0;
        auto v = [&](int64_t rr, int64_t cc) { return x.data()[rr * 2 + cc]; };
        return (v(y0, x0) * (1 - wx) + v(y0, x1) * wx) * (1 - wy) +
               (v(y1, x0) * (1 - wx) + v(y1, x1) * wx) * wy;
    };
    for (int64_t r = 0; r < 4; ++r) {
        for (int64_t c = 0; c < 4; ++c) {
            CHECK(y.data()[r * 4 + c] == doctest::Approx(ref(r, c)).epsilon(1e-12));
        }
    }
}

TEST_CASE("concat and split are inverse along the channel axis") {
    Rng rng(23);
    D a = rand_tensor(rng, {1, 2, 2, 2});
    D b = rand_tensor(rng, {1, 3, 2, 2});
    D cat = concat<double>({a, b}, 1);
    REQUIRE(cat.shape() == Shape{1, 5, 2, 2});
    auto parts = split(cat, 1, {2, 3});
    REQUIRE(parts.size() == 2);
    for (int64_t i = 0; i < a.numel(); ++i) CHECK(parts[0].data()[i] == a.data()[i]);
    for (int64_t i = 0; i < b.numel(); ++i) CHECK(parts[1].data()[i] == b.data()[i]);
    CHECK_THROWS_AS(concat<double>({a, rand_tensor(rng, {1, 2, 3, 2})}, 1), ValidationError);
}

TEST_CASE("gather and scatter by a random permutation compose to the identity") {
    Rng rng(29);
    const int64_t H = 4, W = 6;
    D x = rand_tensor(rng, {2, 3, H, W});
    std::vector<int64_t> order(H * W);
    for (int64_t i = 0; i < H * W; ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);
    D seq = gather_spatial(x, order);
    REQUIRE(seq.shape() == Shape{2, H * W, 3});
    D back = scatter_spatial(seq, order, H, W);
    REQUIRE(back.shape() == x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(back.data()[i] == x.data()[i]);
}

TEST_CASE("matmul matches a triple-loop reference including transpose flags") {
    Rng rng(31);
    D a = rand_tensor(rng, {4, 5});
    D b = rand_tensor(rng, {5, 3});
    D y = matmul(a, b);
    REQUIRE(y.shape() == Shape{4, 3});
    for (int64_t i = 0; i < 4; ++i) {
        for (int64_t j = 0; j < 3; ++j) {
            double acc = 0;
            for (int64_t k = 0; k < 5; ++k) acc += a.data()[i * 5 + k] * b.data()[k * 3 + j];
            CHECK(y.data()[i * 3 + j] == doctest::Approx(acc).epsilon(1e-12));
        }
    }
    // a^T path against the plain product of the materialized transpose.
    D at({5, 4});
    for (int64_t i = 0; i < 4; ++i) {
        for (int64_t k = 0; k < 5; ++k) at.data()[k * 4 + i] = a.data()[i * 5 + k];
    }
    D yt = matmul(at, b, true, false);
    for (int64_t i = 0; i < 12; ++i) CHECK(yt.data()[i] == doctest::Approx(y.data()[i]));
    CHECK_THROWS_AS(matmul(a, rand_tensor(rng, {4, 3})), ValidationError);
}

TEST_CASE("pooling and reduction values") {
    D x = D::from({1, 2, 2, 2}, {1.0, 2.0, 3.0, 4.0, -1.0, -5.0, 2.0, 0.0});
    D avg = global_avg_pool(x);
    REQUIRE(avg.shape() == Shape{1, 2, 1, 1});
    CHECK(avg.data()[0] == doctest::Approx(2.5));
    CHECK(avg.data()[1] == doctest::Approx(-1.0));
    D mx = global_max_pool(x);
    CHECK(mx.data()[0] == 4.0);
    CHECK(mx.data()[1] == 2.0);

    D cmean = channel_mean_map(x);
    REQUIRE(cmean.shape() == Shape{1, 1, 2, 2});
    CHECK(cmean.data()[0] == doctest::Approx(0.0));
    CHECK(cmean.data()[1] == doctest::Approx(-1.5));
    D cmax = channel_max_map(x);
    CHECK(cmax.data()[1] == 2.0);
    CHECK(cmax.data()[3] == 4.0);

    D per = sum_per_sample(reshape(x, {2, 4}));
    REQUIRE(per.shape() == Shape{2});
    CHECK(per.data()[0] == doctest::Approx(10.0));
    CHECK(per.data()[1] == doctest::Approx(-4.0));
    CHECK(reduce_mean_all(x).item() == doctest::Approx(0.75));

    D pooled = avg_pool2d(x, 2);
    REQUIRE(pooled.shape() == Shape{1, 2, 1, 1});
    CHECK(pooled.data()[0] == doctest::Approx(2.5));
}

TEST_CASE("backward of a plain sum fills gradients with ones") {
    D x = D::from({3}, {1.0, 2.0, 3.0});
    x.set_requires_grad(true);
    Tape<double> tape;
    D loss = reduce_sum_all(x);
    tape.backward(loss);
    REQUIRE(x.has_grad());
    for (int64_t i = 0; i < 3; ++i) CHECK(x.grad_values()[static_cast<size_t>(i)] == 1.0);
}

TEST_CASE("backward of sum of squares doubles the input") {
    D x = D::from({3}, {1.0, 2.0, 3.0});
    x.set_requires_grad(true);
    Tape<double> tape;
    D loss = reduce_sum_all(mul(x, x));
    tape.backward(loss);
    CHECK(x.grad_values()[0] == doctest::Approx(2.0));
    CHECK(x.grad_values()[1] == doctest::Approx(4.0));
    CHECK(x.grad_values()[2] == doctest::Approx(6.0));

    // A second backward pass accumulates into leaf grads.
    tape.backward(loss);
    CHECK(x.grad_values()[1] == doctest::Approx(8.0));
    x.zero_grad();
    CHECK(x.grad_values()[1] == 0.0);
}

TEST_CASE("backward rejects a non-scalar loss") {
    D x = D::from({2}, {1.0, 2.0});
    x.set_requires_grad(true);
    Tape<double> tape;
    D y = mul(x, x);
    CHECK_THROWS_AS(tape.backward(y), ValidationError);
}

TEST_CASE("composite graph gradient matches central differences") {
    Rng rng(37);
    D x = rand_tensor(rng, {2, 3, 4, 4}, 0.2, 0.9);
    D w = rand_tensor(rng, {2, 3, 3, 3}, -0.4, 0.4);
    auto fwd = [&]() {
        D h = silu(conv2d(x, w, static_cast<const D*>(nullptr), 1, 1));
        D g = sigmoid(resize_bilinear(h, 8, 8));
        return reduce_mean_all(mul(g, g));
    };
    auto res = check_gradients(fwd, {x, w});
    CHECK(res.max_rel_err <= 1e-4);
}

TEST_CASE("every differentiable op passes its finite-difference battery") {
    auto cases = gradcheck_ops();
    CHECK(cases.size() >= 20);
    for (const auto& c : cases) {
        INFO(c.name, " rel_err=", c.max_rel_err, " worst=", c.worst);
        CHECK(c.pass);
    }
}

TEST_CASE("finite inputs stay finite through a deep op chain") {
    Rng rng(41);
    D x = rand_tensor(rng, {2, 4, 8, 8}, -2.0, 2.0);
    D w = rand_tensor(rng, {4, 4, 3, 3});
    D y = layer_norm(silu(conv2d(x, w, static_cast<const D*>(nullptr), 1, 1)), 1);
    y = softmax(reshape(y, {2, 4 * 64}), 1);
    y = exp_op(clamp(log_op(add_scalar(y, 1e-9)), -30.0, 30.0));
    CHECK(all_finite(y));
}

TEST_CASE("op evaluation is deterministic across repeated runs") {
    Rng rng(43);
    D x = rand_tensor(rng, {1, 3, 6, 6});
    D w = rand_tensor(rng, {3, 3, 3, 3});
    D y1 = conv2d(x, w, static_cast<const D*>(nullptr), 1, 1);
    D y2 = conv2d(x, w, static_cast<const D*>(nullptr), 1, 1);
    for (int64_t i = 0; i < y1.numel(); ++i) CHECK(y1.data()[i] == y2.data()[i]);
}
