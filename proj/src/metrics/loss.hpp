#pragma once

#include <array>

#include "core/ops.hpp"

namespace gcrp {

template <typename T>
struct LossWeights {
    std::array<T, 4> lambda{T(1), T(1), T(1), T(1)};  // kept equal across heads
    T eps = T(1);                                     // soft-IoU smoothing

    void validate() const {
        for (T l : lambda) {
            if (l < T(0)) throw ValidationError("loss weights must be nonnegative");
            if (l != lambda[0]) throw ValidationError("loss weights must be equal across heads");
        }
        if (!(eps > T(0))) throw ValidationError("iou smoothing must be positive");
    }
};

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& p, const Tensor<T>& g) {
    if (p.shape() != g.shape()) {
        throw ValidationError("bce: shape mismatch " + shape_str(p.shape()) + " vs " +
                              shape_str(g.shape()));
    }
    Tensor<T> pc = clamp(p, T(1e-7), T(1) - T(1e-7));
    Tensor<T> pos = mul(g, log_op(pc));
    Tensor<T> neg_term = mul(add_scalar(neg(g), T(1)), log_op(add_scalar(neg(pc), T(1))));
    return neg(reduce_mean_all(add(pos, neg_term)));
}

// Soft-IoU complement, per sample then averaged, so each image counts equally
// regardless of how the batch is composed.
template <typename T>
Tensor<T> iou_loss(const Tensor<T>& p, const Tensor<T>& g, T eps = T(1)) {
    if (p.shape() != g.shape()) {
        throw ValidationError("iou: shape mismatch " + shape_str(p.shape()) + " vs " +
                              shape_str(g.shape()));
    }
    Tensor<T> inter = sum_per_sample(mul(p, g));
    Tensor<T> uni = sub(add(sum_per_sample(p), sum_per_sample(g)), inter);
    Tensor<T> ratio = div(add_scalar(inter, eps), add_scalar(uni, eps));
    return reduce_mean_all(add_scalar(neg(ratio), T(1)));
}

template <typename T>
Tensor<T> total_loss(const std::array<Tensor<T>, 4>& preds, const Tensor<T>& g,
                     const LossWeights<T>& w = {}) {
    w.validate();
    Tensor<T> total;
    for (size_t i = 0; i < 4; ++i) {
        Tensor<T> term = add(bce_loss(preds[i], g), iou_loss(preds[i], g, w.eps));
        if (w.lambda[i] != T(1)) term = mul_scalar(term, w.lambda[i]);
        total = i == 0 ? term : add(total, term);
    }
    return total;
}

}  // namespace gcrp
