#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/ops.hpp"
#include "support/rng.hpp"

namespace gcrp {

// Parameters are collected as (hierarchical name, tensor handle) pairs; the
// handles alias block storage, so optimizer updates through the list are
// visible to the blocks.
template <typename T>
struct NamedParam {
    std::string name;
    Tensor<T> tensor;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

template <typename T>
inline void add_param(ParamList<T>& out, std::string name, const Tensor<T>& t) {
    out.push_back({std::move(name), t});
}

template <typename T>
Tensor<T> trunc_normal_init(Shape shape, Rng& rng, double std_dev = 0.02) {
    Tensor<T> t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) {
        t.data()[i] = static_cast<T>(rng.truncated_normal(std_dev));
    }
    return t;
}

template <typename T>
struct Conv2dLayer {
    Tensor<T> w;  // [cout, cin, k, k]
    Tensor<T> b;  // [cout]
    int64_t stride = 1, pad = 0;

    static Conv2dLayer create(int64_t cin, int64_t cout, int64_t k, int64_t stride, int64_t pad,
                              Rng& rng) {
        Conv2dLayer l;
        l.w = trunc_normal_init<T>({cout, cin, k, k}, rng);
        l.b = Tensor<T>({cout});
        l.stride = stride;
        l.pad = pad;
        return l;
    }

    Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, w, &b, stride, pad); }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        add_param(out, prefix + ".w", w);
        add_param(out, prefix + ".b", b);
    }
};

template <typename T>
struct ConvT2dLayer {
    Tensor<T> w;  // [cin, cout, k, k]
    Tensor<T> b;  // [cout]
    int64_t stride = 1, pad = 0;

    static ConvT2dLayer create(int64_t cin, int64_t cout, int64_t k, int64_t stride, int64_t pad,
                               Rng& rng) {
        ConvT2dLayer l;
        l.w = trunc_normal_init<T>({cin, cout, k, k}, rng);
        l.b = Tensor<T>({cout});
        l.stride = stride;
        l.pad = pad;
        return l;
    }

    Tensor<T> operator()(const Tensor<T>& x) const { return conv2d_transpose(x, w, &b, stride, pad); }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        add_param(out, prefix + ".w", w);
        add_param(out, prefix + ".b", b);
    }
};

template <typename T>
struct DwConv2dLayer {
    Tensor<T> w;  // [c, 1, k, k]
    Tensor<T> b;  // [c]

    static DwConv2dLayer create(int64_t c, int64_t k, Rng& rng) {
        DwConv2dLayer l;
        l.w = trunc_normal_init<T>({c, 1, k, k}, rng);
        l.b = Tensor<T>({c});
        return l;
    }

    Tensor<T> operator()(const Tensor<T>& x) const { return depthwise_conv2d(x, w, &b); }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        add_param(out, prefix + ".w", w);
        add_param(out, prefix + ".b", b);
    }
};

template <typename T>
struct LinearLayer {
    Tensor<T> w;  // [in, out]
    Tensor<T> b;  // [out]

    static LinearLayer create(int64_t in, int64_t out, Rng& rng) {
        LinearLayer l;
        l.w = trunc_normal_init<T>({in, out}, rng);
        l.b = Tensor<T>({out});
        return l;
    }

    Tensor<T> operator()(const Tensor<T>& x) const { return linear(x, w, &b); }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        add_param(out, prefix + ".w", w);
        add_param(out, prefix + ".b", b);
    }
};

// Layer norm across the channel axis of [B,C,H,W] maps, with learned
// per-channel scale and shift.
template <typename T>
struct ChannelLN {
    Tensor<T> gamma;  // [1, C, 1, 1]
    Tensor<T> beta;   // [1, C, 1, 1]

    static ChannelLN create(int64_t c) {
        ChannelLN l;
        l.gamma = Tensor<T>::full({1, c, 1, 1}, T(1));
        l.beta = Tensor<T>({1, c, 1, 1});
        return l;
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        return add(mul(layer_norm(x, 1), gamma), beta);
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        add_param(out, prefix + ".gamma", gamma);
        add_param(out, prefix + ".beta", beta);
    }
};

template <typename T>
inline Tensor<T> relu(const Tensor<T>& x) {
    return leaky_relu(x, T(0));
}

}  // namespace gcrp
