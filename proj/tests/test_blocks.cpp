#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>

#include "blocks/attention.hpp"
#include "blocks/mcaem.hpp"
#include "blocks/msff.hpp"
#include "blocks/rgca.hpp"
#include "blocks/vss.hpp"
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

void zero_fill(D& t) {
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = 0.0;
}

std::array<D, 4> pyramid(Rng& rng, int64_t b, const std::array<int64_t, 4>& ch,
                         const std::array<int64_t, 4>& dims) {
    std::array<D, 4> f;
    for (int i = 0; i < 4; ++i) {
        f[static_cast<size_t>(i)] =
            rand_tensor(rng, {b, ch[static_cast<size_t>(i)], dims[static_cast<size_t>(i)],
                              dims[static_cast<size_t>(i)]});
    }
    return f;
}

// Every collected parameter must receive some gradient from a generic input.
// The one-unit bottleneck MLPs can land with their ReLU dead at a particular
// random init, which would read as a false disconnection; biasing those gates
// slightly open keeps the check about wiring, not about the draw.
template <typename Block>
void check_no_dead_params(const Block& block, const std::function<D()>& forward) {
    ParamList<double> params;
    block.collect("blk", params);
    REQUIRE(!params.empty());
    for (auto& p : params) {
        if (p.name.size() > 9 && p.name.rfind(".ca.fc1.b") == p.name.size() - 9) {
            for (int64_t i = 0; i < p.tensor.numel(); ++i) p.tensor.data()[i] = 0.1;
        }
    }
    for (auto& p : params) {
        p.tensor.set_requires_grad(true);
        p.tensor.zero_grad();
    }
    {
        Tape<double> tape;
        D y = forward();
        D loss = reduce_sum_all(mul(y, y));
        tape.backward(loss);
    }
    for (const auto& p : params) {
        REQUIRE(p.tensor.has_grad());
        double mag = 0;
        for (double gv : p.tensor.grad_values()) mag += std::abs(gv);
        INFO("param ", p.name);
        CHECK(mag > 0.0);
    }
    for (auto& p : params) p.tensor.set_requires_grad(false);
}

}  // namespace

TEST_CASE("multi-scale fusion resamples every stage to the level resolution") {
    Rng rng(401);
    const std::array<int64_t, 4> ch{4, 8, 16, 32};
    const std::array<int64_t, 4> dims{16, 8, 4, 2};
    auto f = pyramid(rng, 2, ch, dims);
    for (int level = 0; level < 4; ++level) {
        Msff<double> m = Msff<double>::create(ch, level, rng);
        D y = m(f);
        CHECK(y.shape() == Shape{2, ch[static_cast<size_t>(level)], dims[static_cast<size_t>(level)],
                                 dims[static_cast<size_t>(level)]});
    }
}

TEST_CASE("fusion of all-zero stages is zero") {
    Rng rng(403);
    const std::array<int64_t, 4> ch{4, 8, 16, 32};
    std::array<D, 4> f{D({1, 4, 16, 16}), D({1, 8, 8, 8}), D({1, 16, 4, 4}), D({1, 32, 2, 2})};
    Msff<double> m = Msff<double>::create(ch, 1, rng);
    D y = m(f);
    for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.data()[i] == 0.0);
}

TEST_CASE("an identity-slice compression isolates the level's own feature") {
    Rng rng(407);
    const std::array<int64_t, 4> ch{4, 8, 16, 32};
    const std::array<int64_t, 4> dims{16, 8, 4, 2};
    auto f = pyramid(rng, 1, ch, dims);
    const int level = 2;
    Msff<double> m = Msff<double>::create(ch, level, rng);
    // Concat order is stage order, so level 2's slice starts at ch0+ch1.
    zero_fill(m.compress.w);
    zero_fill(m.compress.b);
    const int64_t total = 4 + 8 + 16 + 32, offset = 4 + 8;
    for (int64_t o = 0; o < 16; ++o) m.compress.w.data()[o * total + offset + o] = 1.0;
    D y = m(f);
    const D& own = f[level];
    REQUIRE(y.shape() == own.shape());
    for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.data()[i] == own.data()[i]);
}

TEST_CASE("channel attention emits per-channel weights inside (0,1)") {
    Rng rng(409);
    ChannelAttention<double> ca = ChannelAttention<double>::create(8, rng);
    D x = rand_tensor(rng, {2, 8, 5, 5}, -2.0, 2.0);
    D w = ca(x);
    REQUIRE(w.shape() == Shape{2, 8, 1, 1});
    for (int64_t i = 0; i < w.numel(); ++i) {
        CHECK(w.data()[i] > 0.0);
        CHECK(w.data()[i] < 1.0);
    }
    CHECK(ca.fc1.w.shape() == Shape{8, 2});
    CHECK(ca.fc2.w.shape() == Shape{2, 8});
}

TEST_CASE("channel attention of a zero map is exactly one half") {
    Rng rng(419);
    ChannelAttention<double> ca = ChannelAttention<double>::create(6, rng);
    D w = ca(D({1, 6, 4, 4}));
    // Zero descriptors meet zero-initialized biases: both MLP passes emit 0,
    // and sigmoid(0) = 1/2.
    for (int64_t i = 0; i < w.numel(); ++i) CHECK(w.data()[i] == 0.5);
}

TEST_CASE("channel attention matches a hand-computed constant-map case") {
    Rng rng(421);
    ChannelAttention<double> ca = ChannelAttention<double>::create(2, rng);
    REQUIRE(ca.fc1.w.shape() == Shape{2, 1});
    ca.fc1.w.data()[0] = 1.0;
    ca.fc1.w.data()[1] = 0.0;
    zero_fill(ca.fc1.b);
    ca.fc2.w.data()[0] = 0.5;
    ca.fc2.w.data()[1] = -0.3;
    zero_fill(ca.fc2.b);
    D x({1, 2, 2, 2});
    for (int64_t i = 0; i < 4; ++i) x.data()[i] = 0.2;
    for (int64_t i = 4; i < 8; ++i) x.data()[i] = -0.4;
    // avg = max = [0.2, -0.4]; hidden = relu(0.2) twice; s = 2 * 0.2 * [0.5, -0.3].
    D w = ca(x);
    CHECK(w.data()[0] == doctest::Approx(1.0 / (1.0 + std::exp(-0.2))).epsilon(1e-12));
    CHECK(w.data()[1] == doctest::Approx(1.0 / (1.0 + std::exp(0.12))).epsilon(1e-12));
}

TEST_CASE("spatial attention is uniform on a constant map and bounded in (0,1)") {
    Rng rng(431);
    SpatialAttention<double> sa = SpatialAttention<double>::create(rng);
    D x = rand_tensor(rng, {1, 3, 6, 6}, -2.0, 2.0);
    D w = sa(x);
    REQUIRE(w.shape() == Shape{1, 1, 6, 6});
    for (int64_t i = 0; i < w.numel(); ++i) {
        CHECK(w.data()[i] > 0.0);
        CHECK(w.data()[i] < 1.0);
    }

    // Zero padding shades the 3-pixel border, so uniformity on a constant map
    // holds for the pixels whose 7x7 window stays inside.
    D cm = D::full({1, 3, 16, 16}, 0.7);
    D cw = sa(cm);
    const double inner = cw.data()[3 * 16 + 3];
    for (int64_t r = 3; r < 13; ++r) {
        for (int64_t c = 3; c < 13; ++c) {
            CHECK(cw.data()[r * 16 + c] == doctest::Approx(inner).epsilon(1e-12));
        }
    }
}

TEST_CASE("attention-conv stage preserves shape and maps zero to zero") {
    Rng rng(433);
    Ccs<double> ccs = Ccs<double>::create(6, rng);
    D x = rand_tensor(rng, {2, 6, 5, 5});
    D y = ccs(x);
    CHECK(y.shape() == x.shape());

    // Zero input: both gates multiply zero, the conv has zero bias, and the
    // normalization of an all-zero map stays zero.
    D z = ccs(D({1, 6, 4, 4}));
    for (int64_t i = 0; i < z.numel(); ++i) CHECK(z.data()[i] == 0.0);
}

TEST_CASE("saturated attention gates reduce the stage to its conv path") {
    Rng rng(439);
    Ccs<double> ccs = Ccs<double>::create(4, rng);
    // Bias-only MLP: s = 2 * 50, and sigmoid(100) rounds to exactly 1.
    zero_fill(ccs.ca.fc1.w);
    zero_fill(ccs.ca.fc1.b);
    zero_fill(ccs.ca.fc2.w);
    for (int64_t i = 0; i < ccs.ca.fc2.b.numel(); ++i) ccs.ca.fc2.b.data()[i] = 50.0;
    zero_fill(ccs.sa.conv.w);
    for (int64_t i = 0; i < ccs.sa.conv.b.numel(); ++i) ccs.sa.conv.b.data()[i] = 50.0;

    D x = rand_tensor(rng, {1, 4, 5, 5});
    D y = ccs(x);
    D ref = silu(ccs.ln(ccs.conv(x)));
    for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.data()[i] == ref.data()[i]);
}

TEST_CASE("graph-stage stride picks the smallest divisor fitting 24 nodes per side") {
    CHECK(rgca_stride(8) == 1);
    CHECK(rgca_stride(16) == 1);
    CHECK(rgca_stride(24) == 1);
    CHECK(rgca_stride(32) == 2);
    CHECK(rgca_stride(48) == 2);
    CHECK(rgca_stride(25) == 5);
}

TEST_CASE("residual graph enhancement keeps the stage shape") {
    Rng rng(443);
    Rgca<double> m = Rgca<double>::create(4, 8, 8, 8, rng);
    CHECK(m.stride == 1);
    CHECK(m.graph.n == 64);
    D fc = rand_tensor(rng, {2, 4, 8, 8});
    D fi = rand_tensor(rng, {2, 4, 8, 8});
    D y = m(fc, fi);
    CHECK(y.shape() == fi.shape());
    CHECK_THROWS_AS(m(rand_tensor(rng, {1, 4, 16, 16}), fi), ValidationError);
    CHECK_THROWS_AS(Rgca<double>::create(4, 8, 16, 8, rng), ValidationError);

    Rgca<double> wide = Rgca<double>::create(2, 48, 48, 4, rng);
    CHECK(wide.stride == 2);
    CHECK(wide.graph.n == 24 * 24);
}

TEST_CASE("zeroing the return projection leaves only the residual") {
    Rng rng(449);
    Rgca<double> m = Rgca<double>::create(3, 6, 6, 4, rng);
    zero_fill(m.up.w);
    zero_fill(m.up.b);
    D fc = rand_tensor(rng, {1, 3, 6, 6});
    D fi = rand_tensor(rng, {1, 3, 6, 6});
    D y = m(fc, fi);
    for (int64_t i = 0; i < fi.numel(); ++i) CHECK(y.data()[i] == fi.data()[i]);
}

TEST_CASE("hierarchical skip module preserves all four stage shapes") {
    Rng rng(457);
    const std::array<int64_t, 4> ch{4, 8, 16, 32};
    const std::array<int64_t, 4> dims{16, 8, 4, 2};
    DsHgam<double> skip = DsHgam<double>::create(ch, dims, 8, rng);
    auto f = pyramid(rng, 1, ch, dims);
    auto out = skip(f);
    for (int i = 0; i < 4; ++i) {
        CHECK(out[static_cast<size_t>(i)].shape() == f[static_cast<size_t>(i)].shape());
    }

    ParamList<double> params;
    skip.collect("skip", params);
    bool saw_msff = false, saw_gat = false;
    for (const auto& p : params) {
        if (p.name == "skip.level2.msff.compress.w") saw_msff = true;
        if (p.name == "skip.level4.rgca.gat.l_src") saw_gat = true;
    }
    CHECK(saw_msff);
    CHECK(saw_gat);
}

TEST_CASE("local enhancement keeps shape and its branch kernels are 3, 5, 7") {
    Rng rng(461);
    Mcaem<double> m = Mcaem<double>::create(5, rng);
    CHECK(m.branches[0].dw.w.dim(2) == 3);
    CHECK(m.branches[1].dw.w.dim(2) == 5);
    CHECK(m.branches[2].dw.w.dim(2) == 7);
    CHECK(m.fuse.w.shape() == Shape{5, 15, 1, 1});

    D x = rand_tensor(rng, {2, 5, 6, 6});
    D y = m(x);
    CHECK(y.shape() == x.shape());

    ParamList<double> params;
    m.collect("m", params);
    bool saw = false;
    for (const auto& p : params) saw = saw || p.name == "m.k5.ca.fc1.w";
    CHECK(saw);
}

TEST_CASE("zeroing the fusion conv makes local enhancement the identity") {
    Rng rng(463);
    Mcaem<double> m = Mcaem<double>::create(4, rng);
    zero_fill(m.fuse.w);
    zero_fill(m.fuse.b);
    D x = rand_tensor(rng, {1, 4, 5, 5});
    D y = m(x);
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("scan block preserves shape for global and partitioned grids") {
    Rng rng(467);
    for (int64_t grid : {int64_t(1), int64_t(2)}) {
        VssBlock<double> blk = VssBlock<double>::create(4, 2, 8, 8, grid, false, rng);
        D x = rand_tensor(rng, {2, 4, 8, 8});
        D y = blk(x);
        CHECK(y.shape() == x.shape());
        CHECK_THROWS_AS(blk(rand_tensor(rng, {1, 4, 4, 8})), ValidationError);
    }
}

TEST_CASE("zeroing the output projection reduces the scan block to its base") {
    Rng rng(479);
    VssBlock<double> blk = VssBlock<double>::create(4, 2, 8, 8, 2, false, rng);
    zero_fill(blk.out_proj.w);
    zero_fill(blk.out_proj.b);
    D x = rand_tensor(rng, {1, 4, 8, 8});
    D y = blk(x);
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);

    // Decoder variant: additionally zeroing the local fusion conv makes the
    // enhanced base equal x, so the whole block is again an identity.
    VssBlock<double> dec = VssBlock<double>::create(4, 2, 8, 8, 2, true, rng);
    REQUIRE(dec.local != nullptr);
    zero_fill(dec.out_proj.w);
    zero_fill(dec.out_proj.b);
    zero_fill(dec.local->fuse.w);
    zero_fill(dec.local->fuse.b);
    D yd = dec(x);
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(yd.data()[i] == x.data()[i]);
}

TEST_CASE("grid-one scan block uses the global orders") {
    Rng rng(487);
    VssBlock<double> blk = VssBlock<double>::create(4, 2, 6, 6, 1, true, rng);
    auto global = cross_scan_orders(6, 6);
    for (int d = 0; d < 4; ++d) {
        CHECK(blk.orders[static_cast<size_t>(d)].forward == global[static_cast<size_t>(d)].forward);
    }

    ParamList<double> params;
    blk.collect("b", params);
    bool saw_dir = false, saw_local = false;
    for (const auto& p : params) {
        saw_dir = saw_dir || p.name == "b.scan_left.dt_bias";
        saw_local = saw_local || p.name == "b.mcaem.fuse.w";
    }
    CHECK(saw_dir);
    CHECK(saw_local);
}

TEST_CASE("every parameter of every block receives gradient") {
    Rng rng(491);

    Mcaem<double> mc = Mcaem<double>::create(4, rng);
    D xm = rand_tensor(rng, {1, 4, 5, 5});
    check_no_dead_params(mc, [&]() { return mc(xm); });

    Ccs<double> cc = Ccs<double>::create(4, rng);
    D xc = rand_tensor(rng, {1, 4, 5, 5});
    check_no_dead_params(cc, [&]() { return cc(xc); });

    Rgca<double> rg = Rgca<double>::create(3, 6, 6, 8, rng);
    D fc = rand_tensor(rng, {1, 3, 6, 6});
    D fi = rand_tensor(rng, {1, 3, 6, 6});
    check_no_dead_params(rg, [&]() { return rg(fc, fi); });

    VssBlock<double> vb = VssBlock<double>::create(4, 2, 4, 4, 2, true, rng);
    D xv = rand_tensor(rng, {1, 4, 4, 4});
    check_no_dead_params(vb, [&]() { return vb(xv); });
}

TEST_CASE("block-level finite-difference battery passes") {
    auto cases = gradcheck_blocks();
    CHECK(cases.size() >= 6);
    for (const auto& c : cases) {
        INFO(c.name, " rel_err=", c.max_rel_err, " tol=", c.tol, " worst=", c.worst);
        CHECK(c.pass);
    }
}
