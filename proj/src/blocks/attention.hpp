#pragma once

#include "blocks/layers.hpp"

namespace gcrp {

// Channel weights in (0,1): global average and max descriptors through a
// shared bottleneck MLP (reduction 4), summed, sigmoid.
template <typename T>
struct ChannelAttention {
    LinearLayer<T> fc1;  // C -> C/4 (floor, min 1)
    LinearLayer<T> fc2;  // C/4 -> C

    static ChannelAttention create(int64_t c, Rng& rng) {
        const int64_t hidden = c / 4 > 0 ? c / 4 : 1;
        ChannelAttention a;
        a.fc1 = LinearLayer<T>::create(c, hidden, rng);
        a.fc2 = LinearLayer<T>::create(hidden, c, rng);
        return a;
    }

    // [B,C,H,W] -> [B,C,1,1]
    Tensor<T> operator()(const Tensor<T>& x) const {
        const int64_t b = x.dim(0), c = x.dim(1);
        Tensor<T> avg = reshape(global_avg_pool(x), {b, c});
        Tensor<T> mx = reshape(global_max_pool(x), {b, c});
        Tensor<T> s = add(fc2(relu(fc1(avg))), fc2(relu(fc1(mx))));
        return reshape(sigmoid(s), {b, c, 1, 1});
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        fc1.collect(prefix + ".fc1", out);
        fc2.collect(prefix + ".fc2", out);
    }
};

// Spatial map in (0,1): channelwise mean and max maps, 7x7 conv, sigmoid.
template <typename T>
struct SpatialAttention {
    Conv2dLayer<T> conv;  // 2 -> 1, k=7, pad=3

    static SpatialAttention create(Rng& rng) {
        SpatialAttention a;
        a.conv = Conv2dLayer<T>::create(2, 1, 7, 1, 3, rng);
        return a;
    }

    // [B,C,H,W] -> [B,1,H,W]
    Tensor<T> operator()(const Tensor<T>& x) const {
        Tensor<T> maps = concat<T>({channel_mean_map(x), channel_max_map(x)}, 1);
        return sigmoid(conv(maps));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        conv.collect(prefix + ".conv", out);
    }
};

// Channel attention, then spatial attention, then a 3x3 conv with
// normalization and activation; shape-preserving.
template <typename T>
struct Ccs {
    ChannelAttention<T> ca;
    SpatialAttention<T> sa;
    Conv2dLayer<T> conv;  // 3x3, C -> C
    ChannelLN<T> ln;

    static Ccs create(int64_t c, Rng& rng) {
        Ccs m;
        m.ca = ChannelAttention<T>::create(c, rng);
        m.sa = SpatialAttention<T>::create(rng);
        m.conv = Conv2dLayer<T>::create(c, c, 3, 1, 1, rng);
        m.ln = ChannelLN<T>::create(c);
        return m;
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        Tensor<T> y = mul(x, ca(x));
        y = mul(y, sa(y));
        return silu(ln(conv(y)));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        ca.collect(prefix + ".ca", out);
        sa.collect(prefix + ".sa", out);
        conv.collect(prefix + ".conv", out);
        ln.collect(prefix + ".ln", out);
    }
};

}  // namespace gcrp
