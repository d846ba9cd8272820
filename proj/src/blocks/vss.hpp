#pragma once

#include <memory>

#include "blocks/mcaem.hpp"
#include "scan/scan_merge.hpp"
#include "ssm/ssm.hpp"

namespace gcrp {

// Gated four-direction selective-scan block over a [B,C,H,W] map:
//   t = LN(x); m = SiLU(DwConv3x3(Conv1x1(t)))
//   per direction: gather by scan order, per-block sequences through the
//   selective scan with direction-owned parameters, scatter back; sum
//   y = Conv1x1(LN(sum) * SiLU(Conv1x1(t))) + x
// grid = 1 gives the global cross-scan; grid > 1 the block-partitioned scan,
// whose per-block sequences run as independent recurrences. When a local
// enhancement module is attached (the decoder variant), the input passes
// through it first and the residual wraps the enhanced map.
template <typename T>
struct VssBlock {
    ChannelLN<T> ln_in;
    Conv2dLayer<T> in_proj;   // 1x1
    DwConv2dLayer<T> dw;      // 3x3
    std::array<SsmParams<T>, 4> ssm;  // one per scan direction
    ChannelLN<T> ln_mid;
    Conv2dLayer<T> gate;      // 1x1
    Conv2dLayer<T> out_proj;  // 1x1
    std::array<ScanOrder, 4> orders;
    std::unique_ptr<Mcaem<T>> local;  // present in LEVSS decoder blocks
    int64_t h = 0, w = 0, grid = 1;

    static VssBlock create(int64_t c, int64_t n, int64_t h, int64_t w, int64_t grid, bool with_mcaem,
                           Rng& rng) {
        VssBlock b;
        b.h = h;
        b.w = w;
        b.grid = grid;
        b.ln_in = ChannelLN<T>::create(c);
        b.in_proj = Conv2dLayer<T>::create(c, c, 1, 1, 0, rng);
        b.dw = DwConv2dLayer<T>::create(c, 3, rng);
        for (auto& s : b.ssm) s = ssm_params_init<T>(c, n, rng);
        b.ln_mid = ChannelLN<T>::create(c);
        b.gate = Conv2dLayer<T>::create(c, c, 1, 1, 0, rng);
        b.out_proj = Conv2dLayer<T>::create(c, c, 1, 1, 0, rng);
        b.orders = less2d_orders(h, w, grid);
        if (with_mcaem) b.local = std::make_unique<Mcaem<T>>(Mcaem<T>::create(c, rng));
        return b;
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        if (x.dim(2) != h || x.dim(3) != w) throw ValidationError("vss block built for different dims");
        const int64_t b = x.dim(0), c = x.dim(1);
        Tensor<T> base = local ? (*local)(x) : x;
        Tensor<T> t = ln_in(base);
        Tensor<T> m = silu(dw(in_proj(t)));
        const int64_t blocks = grid * grid;
        const int64_t lb = (h / grid) * (w / grid);  // tokens per block
        std::array<Tensor<T>, 4> ys;
        for (int dir = 0; dir < 4; ++dir) {
            const auto& ord = orders[static_cast<size_t>(dir)];
            const auto& p = ssm[static_cast<size_t>(dir)];
            // Block-major gathering makes each block's tokens contiguous, so
            // the [B, L, C] -> [B*blocks, Lb, C] reshape splits the sequence
            // into independent per-block recurrences.
            Tensor<T> seq = reshape(gather_spatial(m, ord.forward), {b * blocks, lb, c});
            Tensor<T> bt = linear(seq, p.w_b);
            Tensor<T> ct = linear(seq, p.w_c);
            Tensor<T> dt = softplus(add(linear(seq, p.w_dt), p.dt_bias));
            Tensor<T> y = ssm_scan(seq, reshape(dt, {b * blocks, lb}), p.A, bt, ct);
            ys[static_cast<size_t>(dir)] = reshape(y, {b, h * w, c});
        }
        Tensor<T> merged = scan_merge(ys, orders);
        Tensor<T> gated = mul(ln_mid(merged), silu(gate(t)));
        return add(out_proj(gated), base);
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        ln_in.collect(prefix + ".ln_in", out);
        in_proj.collect(prefix + ".in_proj", out);
        dw.collect(prefix + ".dw", out);
        const char* dirs[4] = {"right", "down", "left", "up"};
        for (int d = 0; d < 4; ++d) {
            const auto& p = ssm[static_cast<size_t>(d)];
            const std::string sp = prefix + ".scan_" + dirs[d];
            add_param(out, sp + ".A", p.A);
            add_param(out, sp + ".w_b", p.w_b);
            add_param(out, sp + ".w_c", p.w_c);
            add_param(out, sp + ".w_dt", p.w_dt);
            add_param(out, sp + ".dt_bias", p.dt_bias);
        }
        ln_mid.collect(prefix + ".ln_mid", out);
        gate.collect(prefix + ".gate", out);
        out_proj.collect(prefix + ".out_proj", out);
        if (local) local->collect(prefix + ".mcaem", out);
    }
};

}  // namespace gcrp
