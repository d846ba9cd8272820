#pragma once

#include "blocks/attention.hpp"
#include "blocks/msff.hpp"
#include "graph/gat.hpp"

namespace gcrp {

// Smallest divisor s of dim keeping the node grid at most 24 per side, so
// graph attention runs over a bounded node count at every level.
inline int64_t rgca_stride(int64_t dim) {
    for (int64_t s = 1; s <= dim; ++s) {
        if (dim % s == 0 && dim / s <= 24) return s;
    }
    return dim;
}

// Residual graph enhancement: strided s x s conv to a coarse node grid,
// graph attention over it, transposed conv back, gating by the channel
// attention of the (pre-graph) input, residual add of the stage feature.
template <typename T>
struct Rgca {
    Conv2dLayer<T> down;   // k=s, stride=s
    ConvT2dLayer<T> up;    // k=s, stride=s
    GatParams<T> gat;
    ChannelAttention<T> ca;
    GridGraph graph;
    int64_t stride = 1;

    static Rgca create(int64_t c, int64_t h, int64_t w, int connectivity, Rng& rng) {
        if (h != w) throw ValidationError("rgca expects square maps");
        Rgca m;
        m.stride = rgca_stride(h);
        m.down = Conv2dLayer<T>::create(c, c, m.stride, m.stride, 0, rng);
        m.up = ConvT2dLayer<T>::create(c, c, m.stride, m.stride, 0, rng);
        m.gat = gat_params_init<T>(c, rng);
        m.ca = ChannelAttention<T>::create(c, rng);
        m.graph = build_grid_graph(h / m.stride, w / m.stride, connectivity);
        return m;
    }

    // fc: the fused+attended feature; fi: the raw stage feature (residual).
    Tensor<T> operator()(const Tensor<T>& fc, const Tensor<T>& fi) const {
        const int64_t b = fc.dim(0), c = fc.dim(1);
        if (fc.dim(2) / stride != graph.h || fc.dim(3) / stride != graph.w) {
            throw ValidationError("rgca built for different spatial dims");
        }
        Tensor<T> z = down(fc);  // [B,C,hs,ws]
        std::vector<int64_t> iota(static_cast<size_t>(graph.n));
        for (int64_t i = 0; i < graph.n; ++i) iota[static_cast<size_t>(i)] = i;
        Tensor<T> nodes = reshape(gather_spatial(z, iota), {b * graph.n, c});
        Tensor<T> attended = gat_forward(nodes, gat, replicate_graph(graph, b));
        Tensor<T> back = scatter_spatial(reshape(attended, {b, graph.n, c}), iota, graph.h, graph.w);
        Tensor<T> restored = up(back);
        return add(mul(restored, ca(fc)), fi);
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        down.collect(prefix + ".down", out);
        up.collect(prefix + ".up", out);
        add_param(out, prefix + ".gat.W", gat.W);
        add_param(out, prefix + ".gat.l_dst", gat.l_dst);
        add_param(out, prefix + ".gat.l_src", gat.l_src);
        ca.collect(prefix + ".ca", out);
    }
};

// Per pyramid level: multi-scale fusion, channel+spatial attention with a
// conv, then residual graph enhancement against the raw stage feature.
template <typename T>
struct DsHgam {
    std::array<Msff<T>, 4> msff;
    std::array<Ccs<T>, 4> ccs;
    std::array<Rgca<T>, 4> rgca;

    static DsHgam create(const std::array<int64_t, 4>& stage_channels,
                         const std::array<int64_t, 4>& stage_dims, int connectivity, Rng& rng) {
        DsHgam m;
        for (int i = 0; i < 4; ++i) {
            m.msff[static_cast<size_t>(i)] = Msff<T>::create(stage_channels, i, rng);
            m.ccs[static_cast<size_t>(i)] =
                Ccs<T>::create(stage_channels[static_cast<size_t>(i)], rng);
            m.rgca[static_cast<size_t>(i)] =
                Rgca<T>::create(stage_channels[static_cast<size_t>(i)], stage_dims[static_cast<size_t>(i)],
                                stage_dims[static_cast<size_t>(i)], connectivity, rng);
        }
        return m;
    }

    std::array<Tensor<T>, 4> operator()(const std::array<Tensor<T>, 4>& f) const {
        std::array<Tensor<T>, 4> out;
        for (int i = 0; i < 4; ++i) {
            Tensor<T> fused = msff[static_cast<size_t>(i)](f);
            Tensor<T> attended = ccs[static_cast<size_t>(i)](fused);
            out[static_cast<size_t>(i)] =
                rgca[static_cast<size_t>(i)](attended, f[static_cast<size_t>(i)]);
        }
        return out;
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        for (int i = 0; i < 4; ++i) {
            const std::string lvl = prefix + ".level" + std::to_string(i + 1);
            msff[static_cast<size_t>(i)].collect(lvl + ".msff", out);
            ccs[static_cast<size_t>(i)].collect(lvl + ".ccs", out);
            rgca[static_cast<size_t>(i)].collect(lvl + ".rgca", out);
        }
    }
};

}  // namespace gcrp
