#pragma once

#include "blocks/attention.hpp"

namespace gcrp {

// Multi-kernel local enhancement: depthwise-separable branches at kernel
// sizes 3, 5, 7, each modulated by its channel and spatial attention applied
// in parallel and summed, concatenated, compressed 1x1, residual-added.
template <typename T>
struct Mcaem {
    struct Branch {
        DwConv2dLayer<T> dw;
        Conv2dLayer<T> pw;  // 1x1 pointwise completing the separable conv
        ChannelAttention<T> ca;
        SpatialAttention<T> sa;
    };
    std::array<Branch, 3> branches;  // k = 3, 5, 7
    Conv2dLayer<T> fuse;             // 1x1: 3C -> C

    static Mcaem create(int64_t c, Rng& rng) {
        Mcaem m;
        const int64_t kernels[3] = {3, 5, 7};
        for (int i = 0; i < 3; ++i) {
            auto& br = m.branches[static_cast<size_t>(i)];
            br.dw = DwConv2dLayer<T>::create(c, kernels[i], rng);
            br.pw = Conv2dLayer<T>::create(c, c, 1, 1, 0, rng);
            br.ca = ChannelAttention<T>::create(c, rng);
            br.sa = SpatialAttention<T>::create(rng);
        }
        m.fuse = Conv2dLayer<T>::create(3 * c, c, 1, 1, 0, rng);
        return m;
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        std::vector<Tensor<T>> enhanced;
        for (const auto& br : branches) {
            Tensor<T> fk = br.pw(br.dw(x));
            enhanced.push_back(add(mul(fk, br.ca(fk)), mul(fk, br.sa(fk))));
        }
        return add(x, fuse(concat(enhanced, 1)));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        const char* names[3] = {"k3", "k5", "k7"};
        for (int i = 0; i < 3; ++i) {
            const auto& br = branches[static_cast<size_t>(i)];
            const std::string p = prefix + "." + names[i];
            br.dw.collect(p + ".dw", out);
            br.pw.collect(p + ".pw", out);
            br.ca.collect(p + ".ca", out);
            br.sa.collect(p + ".sa", out);
        }
        fuse.collect(prefix + ".fuse", out);
    }
};

}  // namespace gcrp
