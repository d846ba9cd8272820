#include "harness/gradcheck_suite.hpp"

#include <functional>

#include "blocks/rgca.hpp"
#include "blocks/vss.hpp"
#include "core/gradcheck.hpp"
#include "core/ops.hpp"
#include "metrics/loss.hpp"
#include "model/gcrpnet_model.hpp"

namespace gcrp {

namespace {

using D = Tensor<double>;

D rand_t(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    D t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

// Values bounded away from zero, for kinked activations and divisors.
D rand_away(Rng& rng, Shape shape, double margin, double span) {
    D t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) {
        const double mag = rng.uniform(margin, margin + span);
        t.data()[i] = rng.bernoulli(0.5) ? mag : -mag;
    }
    return t;
}

// Fixed random weights turn any output into a scalar with nonuniform
// sensitivity to every element.
D probe_like(Rng& rng, const Shape& shape) {
    D t(shape);
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(-1.0, 1.0);
    return t;
}

D weigh(const D& out, const D& probe) { return reduce_sum_all(mul(out, probe)); }

void run_case(std::vector<GradCheckCase>& out, const std::string& name, double tol,
              const std::function<D()>& fwd, std::vector<D> leaves, int64_t cap = 0) {
    GradCheckResult r = check_gradients(fwd, std::move(leaves), 1e-4, 1e-3, cap);
    out.push_back({name, r.max_rel_err, tol, r.max_rel_err <= tol, r.worst});
}

void leaves_of(const ParamList<double>& params, std::vector<D>& out) {
    for (const auto& p : params) out.push_back(p.tensor);
}

// Widens the post-init activation spread of deep compositions so central
// differencing at h = 1e-4 stays inside each op's smooth regime (layer-norm
// variances and max-pool gaps well above h). Only the probe point moves; the
// differentiated function is untouched.
void scale_matching(ParamList<double>& params, const std::string& needle, double k) {
    for (auto& p : params) {
        if (p.name.find(needle) == std::string::npos) continue;
        for (int64_t i = 0; i < p.tensor.numel(); ++i) p.tensor.data()[i] *= k;
    }
}

// Moves matching values to a random point in [lo, hi]: probing a bias whose
// downstream relu preactivation sits within h of zero would cross the kink.
void fill_matching(ParamList<double>& params, const std::string& needle, double lo, double hi,
                   Rng& rng) {
    for (auto& p : params) {
        if (p.name.find(needle) == std::string::npos) continue;
        for (int64_t i = 0; i < p.tensor.numel(); ++i) p.tensor.data()[i] = rng.uniform(lo, hi);
    }
}

constexpr double kOpTol = 1e-4;

}  // namespace

std::vector<GradCheckCase> gradcheck_ops() {
    std::vector<GradCheckCase> cases;
    Rng rng(7);

    {
        D a = rand_t(rng, {2, 3, 4}), b = rand_t(rng, {1, 3, 1});
        D p = probe_like(rng, {2, 3, 4});
        run_case(cases, "add_broadcast", kOpTol, [=] { return weigh(add(a, b), p); }, {a, b});
        run_case(cases, "sub_broadcast", kOpTol, [=] { return weigh(sub(a, b), p); }, {a, b});
        run_case(cases, "mul_broadcast", kOpTol, [=] { return weigh(mul(a, b), p); }, {a, b});
    }
    {
        D a = rand_t(rng, {2, 3, 4});
        D b = rand_t(rng, {3, 4}, 0.5, 1.5);
        D p = probe_like(rng, {2, 3, 4});
        run_case(cases, "div_broadcast", kOpTol, [=] { return weigh(div(a, b), p); }, {a, b});
    }
    {
        D x = rand_t(rng, {3, 5});
        D pos = rand_t(rng, {3, 5}, 0.5, 2.0);
        D p = probe_like(rng, {3, 5});
        run_case(cases, "exp", kOpTol, [=] { return weigh(exp_op(x), p); }, {x});
        run_case(cases, "log", kOpTol, [=] { return weigh(log_op(pos), p); }, {pos});
        run_case(cases, "neg_add_mul_scalar", kOpTol,
                 [=] { return weigh(add_scalar(mul_scalar(neg(x), 1.7), 0.3), p); }, {x});
        run_case(cases, "sigmoid", kOpTol, [=] { return weigh(sigmoid(x), p); }, {x});
        run_case(cases, "silu", kOpTol, [=] { return weigh(silu(x), p); }, {x});
        run_case(cases, "softplus", kOpTol, [=] { return weigh(softplus(x), p); }, {x});
    }
    {
        D x = rand_away(rng, {3, 5}, 0.05, 1.0);
        D p = probe_like(rng, {3, 5});
        run_case(cases, "leaky_relu", kOpTol, [=] { return weigh(leaky_relu(x, 0.2), p); }, {x});
        run_case(cases, "elu", kOpTol, [=] { return weigh(elu(x), p); }, {x});
        // Clamp bounds sit beyond all sampled magnitudes plus the FD step.
        run_case(cases, "clamp_interior", kOpTol, [=] { return weigh(clamp(x, -2.0, 2.0), p); },
                 {x});
    }
    {
        D x = rand_t(rng, {2, 3, 4});
        D p = probe_like(rng, {2, 3, 4});
        run_case(cases, "softmax_axis1", kOpTol, [=] { return weigh(softmax(x, 1), p); }, {x});
        run_case(cases, "layer_norm_axis1", kOpTol, [=] { return weigh(layer_norm(x, 1), p); }, {x});
    }
    {
        D a = rand_t(rng, {3, 4}), b = rand_t(rng, {4, 5});
        D at = rand_t(rng, {4, 3}), bt = rand_t(rng, {5, 4});
        D p = probe_like(rng, {3, 5});
        run_case(cases, "matmul", kOpTol, [=] { return weigh(matmul(a, b), p); }, {a, b});
        run_case(cases, "matmul_ta", kOpTol, [=] { return weigh(matmul(at, b, true, false), p); },
                 {at, b});
        run_case(cases, "matmul_tb", kOpTol, [=] { return weigh(matmul(a, bt, false, true), p); },
                 {a, bt});
        run_case(cases, "matmul_ta_tb", kOpTol,
                 [=] { return weigh(matmul(at, bt, true, true), p); }, {at, bt});
    }
    {
        D x = rand_t(rng, {2, 3, 5}), w = rand_t(rng, {5, 4}), b = rand_t(rng, {4});
        D p = probe_like(rng, {2, 3, 4});
        run_case(cases, "linear_bias", kOpTol, [=] { return weigh(linear(x, w, &b), p); },
                 {x, w, b});
    }
    {
        D x = rand_t(rng, {2, 3, 5, 5}), w = rand_t(rng, {4, 3, 3, 3}), b = rand_t(rng, {4});
        D p = probe_like(rng, {2, 4, 3, 3});
        run_case(cases, "conv2d_s2p1", kOpTol, [=] { return weigh(conv2d(x, w, &b, 2, 1), p); },
                 {x, w, b});
    }
    {
        D x = rand_t(rng, {2, 3, 4, 4}), w = rand_t(rng, {3, 2, 2, 2}), b = rand_t(rng, {2});
        D p = probe_like(rng, {2, 2, 8, 8});
        run_case(cases, "conv2d_transpose_s2", kOpTol,
                 [=] { return weigh(conv2d_transpose(x, w, &b, 2, 0), p); }, {x, w, b});
    }
    {
        D x = rand_t(rng, {2, 4, 5, 5}), w = rand_t(rng, {4, 1, 3, 3}), b = rand_t(rng, {4});
        D p = probe_like(rng, {2, 4, 5, 5});
        run_case(cases, "depthwise_conv2d", kOpTol,
                 [=] { return weigh(depthwise_conv2d(x, w, &b), p); }, {x, w, b});
    }
    {
        D x = rand_t(rng, {2, 3, 4, 4});
        D p2 = probe_like(rng, {2, 3, 2, 2});
        D p1 = probe_like(rng, {2, 3, 1, 1});
        D pm = probe_like(rng, {2, 1, 4, 4});
        run_case(cases, "avg_pool2d", kOpTol, [=] { return weigh(avg_pool2d(x, 2), p2); }, {x});
        run_case(cases, "global_avg_pool", kOpTol, [=] { return weigh(global_avg_pool(x), p1); },
                 {x});
        run_case(cases, "global_max_pool", kOpTol, [=] { return weigh(global_max_pool(x), p1); },
                 {x});
        run_case(cases, "channel_mean_map", kOpTol, [=] { return weigh(channel_mean_map(x), pm); },
                 {x});
        run_case(cases, "channel_max_map", kOpTol, [=] { return weigh(channel_max_map(x), pm); },
                 {x});
        run_case(cases, "reduce_mean_all", kOpTol, [=] { return reduce_mean_all(x); }, {x});
        D ps = probe_like(rng, {2});
        run_case(cases, "sum_per_sample", kOpTol, [=] { return weigh(sum_per_sample(x), ps); }, {x});
    }
    {
        D x = rand_t(rng, {2, 3, 4, 4});
        D pu = probe_like(rng, {2, 3, 7, 5});
        D pd = probe_like(rng, {2, 3, 2, 2});
        run_case(cases, "resize_bilinear_up", kOpTol,
                 [=] { return weigh(resize_bilinear(x, 7, 5), pu); }, {x});
        run_case(cases, "resize_bilinear_down", kOpTol,
                 [=] { return weigh(resize_bilinear(x, 2, 2), pd); }, {x});
        run_case(cases, "resize_nearest", kOpTol, [=] { return weigh(resize_nearest(x, 7, 5), pu); },
                 {x});
    }
    {
        D a = rand_t(rng, {2, 2, 3}), b = rand_t(rng, {2, 1, 3});
        D p = probe_like(rng, {2, 3, 3});
        run_case(cases, "concat_axis1", kOpTol,
                 [=] { return weigh(concat<double>({a, b}, 1), p); }, {a, b});
        D x = rand_t(rng, {2, 5});
        D q0 = probe_like(rng, {2, 2}), q1 = probe_like(rng, {2, 3});
        run_case(cases, "split_axis1", kOpTol,
                 [=] {
                     auto parts = split(x, 1, {2, 3});
                     return add(weigh(parts[0], q0), mul_scalar(weigh(parts[1], q1), 2.0));
                 },
                 {x});
        D pr = probe_like(rng, {10});
        run_case(cases, "reshape", kOpTol, [=] { return weigh(reshape(x, {10}), pr); }, {x});
    }
    {
        D x = rand_t(rng, {2, 3, 2, 2});
        std::vector<int64_t> order{2, 0, 3, 1};
        D pg = probe_like(rng, {2, 4, 3});
        run_case(cases, "gather_spatial", kOpTol,
                 [=] { return weigh(gather_spatial(x, order), pg); }, {x});
        D seq = rand_t(rng, {2, 4, 3});
        D psc = probe_like(rng, {2, 3, 2, 2});
        run_case(cases, "scatter_spatial", kOpTol,
                 [=] { return weigh(scatter_spatial(seq, order, 2, 2), psc); }, {seq});
        D rows = rand_t(rng, {4, 3});
        std::vector<int64_t> idx{0, 2, 2, 3, 1};
        D pi = probe_like(rng, {5, 3});
        run_case(cases, "index_rows_repeats", kOpTol,
                 [=] { return weigh(index_rows(rows, idx), pi); }, {rows});
    }
    {
        std::vector<int64_t> offsets{0, 2, 5, 6};
        D scores = rand_t(rng, {6});
        D feats = rand_t(rng, {4, 3});
        std::vector<int64_t> src{0, 1, 1, 2, 3, 0};
        D pa = probe_like(rng, {6});
        D pw = probe_like(rng, {3, 3});
        run_case(cases, "segment_softmax", kOpTol,
                 [=] { return weigh(segment_softmax(scores, offsets), pa); }, {scores});
        run_case(cases, "weighted_gather_sum", kOpTol,
                 [=] {
                     D alpha = segment_softmax(scores, offsets);
                     return weigh(weighted_gather_sum(alpha, feats, src, offsets), pw);
                 },
                 {scores, feats});
    }
    {
        const int64_t g = 2, l = 6, d = 3, n = 2;
        D u = rand_t(rng, {g, l, d});
        D delta = rand_t(rng, {g, l}, 0.01, 0.1);
        D a = rand_t(rng, {d, n}, -2.0, -0.5);
        D bmat = rand_t(rng, {g, l, n});
        D cmat = rand_t(rng, {g, l, n});
        D p = probe_like(rng, {g, l, d});
        run_case(cases, "ssm_scan", kOpTol,
                 [=] { return weigh(ssm_scan(u, delta, a, bmat, cmat), p); },
                 {u, delta, a, bmat, cmat});
        run_case(cases, "ssm_scan_assoc", kOpTol,
                 [=] { return weigh(ssm_scan_assoc(u, delta, a, bmat, cmat), p); },
                 {u, delta, a, bmat, cmat});
    }
    {
        // Multi-chunk associative path: length past one chunk boundary.
        const int64_t g = 1, l = 150, d = 2, n = 2;
        D u = rand_t(rng, {g, l, d});
        D delta = rand_t(rng, {g, l}, 0.01, 0.1);
        D a = rand_t(rng, {d, n}, -2.0, -0.5);
        D bmat = rand_t(rng, {g, l, n});
        D cmat = rand_t(rng, {g, l, n});
        D p = probe_like(rng, {g, l, d});
        run_case(cases, "ssm_scan_assoc_long", kOpTol,
                 [=] { return weigh(ssm_scan_assoc(u, delta, a, bmat, cmat), p); },
                 {u, delta, a, bmat, cmat}, 24);
    }
    {
        // Losses: predictions squashed into (0,1) inside the closure.
        D z1 = rand_t(rng, {2, 1, 4, 4}), z2 = rand_t(rng, {2, 1, 4, 4});
        D z3 = rand_t(rng, {2, 1, 4, 4}), z4 = rand_t(rng, {2, 1, 4, 4});
        D g = D({2, 1, 4, 4});
        for (int64_t i = 0; i < g.numel(); ++i) g.data()[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        run_case(cases, "bce_loss", kOpTol, [=] { return bce_loss(sigmoid(z1), g); }, {z1});
        run_case(cases, "iou_loss", kOpTol, [=] { return iou_loss(sigmoid(z1), g, 1.0); }, {z1});
        run_case(cases, "total_loss", kOpTol,
                 [=] {
                     std::array<D, 4> preds{sigmoid(z1), sigmoid(z2), sigmoid(z3), sigmoid(z4)};
                     return total_loss(preds, g);
                 },
                 {z1, z2, z3, z4});
    }
    return cases;
}

std::vector<GradCheckCase> gradcheck_blocks() {
    std::vector<GradCheckCase> cases;
    Rng rng(11);

    {
        auto ca = ChannelAttention<double>::create(4, rng);
        D x = rand_t(rng, {2, 4, 5, 5});
        D p = probe_like(rng, {2, 4, 1, 1});
        ParamList<double> params;
        ca.collect("ca", params);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "channel_attention", kOpTol, [&ca, x, p] { return weigh(ca(x), p); },
                 leaves);
    }
    {
        auto sa = SpatialAttention<double>::create(rng);
        D x = rand_t(rng, {2, 4, 8, 8});
        D p = probe_like(rng, {2, 1, 8, 8});
        ParamList<double> params;
        sa.collect("sa", params);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "spatial_attention", kOpTol, [&sa, x, p] { return weigh(sa(x), p); },
                 leaves);
    }
    {
        auto ccs = Ccs<double>::create(4, rng);
        D x = rand_t(rng, {2, 4, 6, 6});
        D p = probe_like(rng, {2, 4, 6, 6});
        ParamList<double> params;
        ccs.collect("ccs", params);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "ccs_attention_conv", kOpTol, [&ccs, x, p] { return weigh(ccs(x), p); },
                 leaves, 8);
    }
    {
        const std::array<int64_t, 4> ch{4, 8, 16, 32};
        auto msff = Msff<double>::create(ch, 1, rng);
        std::array<D, 4> f{rand_t(rng, {2, 4, 16, 16}), rand_t(rng, {2, 8, 8, 8}),
                           rand_t(rng, {2, 16, 4, 4}), rand_t(rng, {2, 32, 2, 2})};
        D p = probe_like(rng, {2, 8, 8, 8});
        ParamList<double> params;
        msff.collect("msff", params);
        std::vector<D> leaves{f[0], f[1], f[2], f[3]};
        leaves_of(params, leaves);
        run_case(cases, "msff_level2", kOpTol, [&msff, f, p] { return weigh(msff(f), p); }, leaves,
                 8);
    }
    {
        auto rgca = Rgca<double>::create(4, 8, 8, 8, rng);
        D fc = rand_t(rng, {2, 4, 8, 8});
        D fi = rand_t(rng, {2, 4, 8, 8});
        D p = probe_like(rng, {2, 4, 8, 8});
        ParamList<double> params;
        rgca.collect("rgca", params);
        std::vector<D> leaves{fc, fi};
        leaves_of(params, leaves);
        run_case(cases, "rgca", kOpTol, [&rgca, fc, fi, p] { return weigh(rgca(fc, fi), p); },
                 leaves, 8);
    }
    {
        auto mc = Mcaem<double>::create(4, rng);
        D x = rand_t(rng, {2, 4, 6, 6});
        D p = probe_like(rng, {2, 4, 6, 6});
        ParamList<double> params;
        mc.collect("mcaem", params);
        scale_matching(params, ".dw.w", 6.0);
        scale_matching(params, ".pw.w", 6.0);
        fill_matching(params, ".ca.fc1.b", 0.05, 0.15, rng);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "mcaem", kOpTol, [&mc, x, p] { return weigh(mc(x), p); }, leaves, 8);
    }
    {
        auto gat = gat_params_init<double>(4, rng);
        GridGraph graph = build_grid_graph(3, 3, 8);
        D feats = rand_t(rng, {9, 4});
        D p = probe_like(rng, {9, 4});
        std::vector<D> leaves{feats, gat.W, gat.l_dst, gat.l_src};
        run_case(cases, "gat_forward", kOpTol,
                 [&gat, &graph, feats, p] { return weigh(gat_forward(feats, gat, graph), p); },
                 leaves);
    }
    {
        auto vss = VssBlock<double>::create(4, 2, 4, 4, 1, false, rng);
        D x = rand_t(rng, {2, 4, 4, 4});
        D p = probe_like(rng, {2, 4, 4, 4});
        ParamList<double> params;
        vss.collect("vss", params);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "vss_block_global", kOpTol, [&vss, x, p] { return weigh(vss(x), p); },
                 leaves, 6);
    }
    {
        auto vss = VssBlock<double>::create(4, 2, 4, 4, 2, true, rng);
        D x = rand_t(rng, {1, 4, 4, 4});
        D p = probe_like(rng, {1, 4, 4, 4});
        ParamList<double> params;
        vss.collect("levss", params);
        scale_matching(params, ".mcaem.k", 6.0);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "levss_block_partitioned", kOpTol, [&vss, x, p] { return weigh(vss(x), p); },
                 leaves, 6);
    }
    {
        const std::array<int64_t, 4> ch{4, 8, 16, 32};
        const std::array<int64_t, 4> dims{16, 8, 4, 2};
        auto hg = DsHgam<double>::create(ch, dims, 8, rng);
        std::array<D, 4> f{rand_t(rng, {1, 4, 16, 16}), rand_t(rng, {1, 8, 8, 8}),
                           rand_t(rng, {1, 16, 4, 4}), rand_t(rng, {1, 32, 2, 2})};
        std::array<D, 4> probes{probe_like(rng, {1, 4, 16, 16}), probe_like(rng, {1, 8, 8, 8}),
                                probe_like(rng, {1, 16, 4, 4}), probe_like(rng, {1, 32, 2, 2})};
        ParamList<double> params;
        hg.collect("skip", params);
        scale_matching(params, ".msff.compress.w", 8.0);
        scale_matching(params, ".ccs.conv.w", 8.0);
        std::vector<D> leaves{f[0], f[1], f[2], f[3]};
        leaves_of(params, leaves);
        run_case(cases, "dshgam", kOpTol,
                 [&hg, f, probes] {
                     auto out = hg(f);
                     D loss = weigh(out[0], probes[0]);
                     for (int i = 1; i < 4; ++i) {
                         loss = add(loss, weigh(out[static_cast<size_t>(i)],
                                                probes[static_cast<size_t>(i)]));
                     }
                     return loss;
                 },
                 leaves, 3);
    }
    {
        auto embed = PatchEmbed<double>::create(4, rng);
        D x = rand_t(rng, {1, 3, 6, 6});
        D p = probe_like(rng, {1, 4, 6, 6});
        ParamList<double> params;
        embed.collect("embed", params);
        scale_matching(params, ".conv1.w", 16.0);
        scale_matching(params, ".conv2.w", 16.0);
        std::vector<D> leaves{x};
        leaves_of(params, leaves);
        run_case(cases, "patch_embed", kOpTol, [&embed, x, p] { return weigh(embed(x), p); },
                 leaves);
    }
    return cases;
}

std::vector<GradCheckCase> gradcheck_model() {
    std::vector<GradCheckCase> cases;
    ModelConfig mc;
    mc.base_channels = 4;
    mc.state_dim = 2;
    mc.input_size = 32;
    mc.enc_depths = {1, 1, 1, 1};
    mc.dec_depths = {1, 1, 1, 1};
    mc.seed = 5;
    GcrpNet<double> model(mc);

    Rng rng(13);
    D x = rand_t(rng, {1, 3, 32, 32});
    D g = D({1, 1, 32, 32});
    for (int64_t i = 0; i < g.numel(); ++i) g.data()[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;

    ParamList<double> params = model.params();
    std::vector<D> leaves{x};
    leaves_of(params, leaves);
    run_case(cases, "micro_model_total_loss", 1e-3,
             [&model, x, g] {
                 SaliencyOutputs<double> outs = model.forward(x);
                 return total_loss(outs.maps, g);
             },
             leaves, 1);
    return cases;
}

std::vector<GradCheckCase> gradcheck_scope(const std::string& scope) {
    std::vector<GradCheckCase> all;
    const bool everything = scope == "all";
    if (scope == "op" || everything) {
        auto c = gradcheck_ops();
        all.insert(all.end(), c.begin(), c.end());
    }
    if (scope == "block" || everything) {
        auto c = gradcheck_blocks();
        all.insert(all.end(), c.begin(), c.end());
    }
    if (scope == "model" || everything) {
        auto c = gradcheck_model();
        all.insert(all.end(), c.begin(), c.end());
    }
    if (all.empty()) {
        throw ValidationError("unknown gradcheck scope '" + scope + "' (op|block|model|all)");
    }
    return all;
}

bool all_pass(const std::vector<GradCheckCase>& cases) {
    for (const auto& c : cases) {
        if (!c.pass) return false;
    }
    return true;
}

}  // namespace gcrp
