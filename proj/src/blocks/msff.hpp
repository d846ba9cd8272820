#pragma once

#include <array>

#include "blocks/layers.hpp"

namespace gcrp {

// Multi-scale fusion for one pyramid level: every stage feature is resampled
// to this level's resolution (bilinear up, window-average down), channel
// concatenated, and compressed by a 1x1 conv to the level's width.
template <typename T>
struct Msff {
    Conv2dLayer<T> compress;  // 1x1: sum of stage widths -> level width
    int level = 0;            // 0-based stage index

    static Msff create(const std::array<int64_t, 4>& stage_channels, int level, Rng& rng) {
        int64_t total = 0;
        for (int64_t c : stage_channels) total += c;
        Msff m;
        m.level = level;
        m.compress =
            Conv2dLayer<T>::create(total, stage_channels[static_cast<size_t>(level)], 1, 1, 0, rng);
        return m;
    }

    Tensor<T> operator()(const std::array<Tensor<T>, 4>& f) const {
        const Tensor<T>& ref = f[static_cast<size_t>(level)];
        const int64_t th = ref.dim(2), tw = ref.dim(3);
        std::vector<Tensor<T>> resized;
        for (int i = 0; i < 4; ++i) {
            const Tensor<T>& fi = f[static_cast<size_t>(i)];
            if (i == level) {
                resized.push_back(fi);
            } else if (i < level) {
                // Higher resolution than target: spatial dims halve per stage.
                resized.push_back(avg_pool2d(fi, fi.dim(2) / th));
            } else {
                resized.push_back(resize_bilinear(fi, th, tw));
            }
        }
        return compress(concat(resized, 1));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        compress.collect(prefix + ".compress", out);
    }
};

}  // namespace gcrp
