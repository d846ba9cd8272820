#pragma once

#include "core/tensor.hpp"

namespace gcrp {

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
    if (x.rank() != 4) throw ValidationError("global_avg_pool expects [B,C,H,W]");
    const int64_t BC = x.dim(0) * x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor<T> out({x.dim(0), x.dim(1), 1, 1});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t i = 0; i < BC; ++i) {
        T s = T(0);
        for (int64_t j = 0; j < HW; ++j) s += px[i * HW + j];
        po[i] = s / static_cast<T>(HW);
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, BC, HW]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t i = 0; i < BC; ++i) {
                const T d = pd[i] / static_cast<T>(HW);
                for (int64_t j = 0; j < HW; ++j) gx[i * HW + j] += d;
            }
        });
    }
    return out;
}

// Max over spatial extent; gradient flows to the first maximum position.
template <typename T>
Tensor<T> global_max_pool(const Tensor<T>& x) {
    if (x.rank() != 4) throw ValidationError("global_max_pool expects [B,C,H,W]");
    const int64_t BC = x.dim(0) * x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor<T> out({x.dim(0), x.dim(1), 1, 1});
    std::vector<int64_t> arg(static_cast<size_t>(BC));
    const T* px = x.data();
    T* po = out.data();
    for (int64_t i = 0; i < BC; ++i) {
        int64_t best = 0;
        for (int64_t j = 1; j < HW; ++j) {
            if (px[i * HW + j] > px[i * HW + best]) best = j;
        }
        arg[static_cast<size_t>(i)] = best;
        po[i] = px[i * HW + best];
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, arg = std::move(arg), BC, HW]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t i = 0; i < BC; ++i) gx[i * HW + arg[static_cast<size_t>(i)]] += pd[i];
        });
    }
    return out;
}

// Mean over channels: [B,C,H,W] -> [B,1,H,W].
template <typename T>
Tensor<T> channel_mean_map(const Tensor<T>& x) {
    if (x.rank() != 4) throw ValidationError("channel_mean_map expects [B,C,H,W]");
    const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor<T> out({B, 1, x.dim(2), x.dim(3)});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t b = 0; b < B; ++b) {
        for (int64_t j = 0; j < HW; ++j) {
            T s = T(0);
            for (int64_t c = 0; c < C; ++c) s += px[(b * C + c) * HW + j];
            po[b * HW + j] = s / static_cast<T>(C);
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, B, C, HW]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t b = 0; b < B; ++b) {
                for (int64_t j = 0; j < HW; ++j) {
                    const T d = pd[b * HW + j] / static_cast<T>(C);
                    for (int64_t c = 0; c < C; ++c) gx[(b * C + c) * HW + j] += d;
                }
            }
        });
    }
    return out;
}

// Max over channels: [B,C,H,W] -> [B,1,H,W]; first maximum takes the gradient.
template <typename T>
Tensor<T> channel_max_map(const Tensor<T>& x) {
    if (x.rank() != 4) throw ValidationError("channel_max_map expects [B,C,H,W]");
    const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    Tensor<T> out({B, 1, x.dim(2), x.dim(3)});
    std::vector<int64_t> arg(static_cast<size_t>(B * HW));
    const T* px = x.data();
    T* po = out.data();
    for (int64_t b = 0; b < B; ++b) {
        for (int64_t j = 0; j < HW; ++j) {
            int64_t best = 0;
            for (int64_t c = 1; c < C; ++c) {
                if (px[(b * C + c) * HW + j] > px[(b * C + best) * HW + j]) best = c;
            }
            arg[static_cast<size_t>(b * HW + j)] = best;
            po[b * HW + j] = px[(b * C + best) * HW + j];
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, arg = std::move(arg), B, C, HW]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t b = 0; b < B; ++b) {
                for (int64_t j = 0; j < HW; ++j) {
                    gx[(b * C + arg[static_cast<size_t>(b * HW + j)]) * HW + j] += pd[b * HW + j];
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> reduce_sum_all(const Tensor<T>& x) {
    Tensor<T> out({1});
    const T* px = x.data();
    T s = T(0);
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) s += px[i];
    out.data()[0] = s;
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out]() mutable {
            const T d = out.grad_values()[0];
            T* gx = x.grad();
            const int64_t n = x.numel();
            for (int64_t i = 0; i < n; ++i) gx[i] += d;
        });
    }
    return out;
}

template <typename T>
Tensor<T> reduce_mean_all(const Tensor<T>& x) {
    Tensor<T> out({1});
    const T* px = x.data();
    T s = T(0);
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) s += px[i];
    out.data()[0] = s / static_cast<T>(n);
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out]() mutable {
            const T d = out.grad_values()[0] / static_cast<T>(x.numel());
            T* gx = x.grad();
            const int64_t n = x.numel();
            for (int64_t i = 0; i < n; ++i) gx[i] += d;
        });
    }
    return out;
}

// Non-overlapping window average: [B,C,H,W] -> [B,C,H/f,W/f].
template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x, int64_t factor) {
    if (x.rank() != 4) throw ValidationError("avg_pool2d expects [B,C,H,W]");
    if (factor < 1 || x.dim(2) % factor != 0 || x.dim(3) % factor != 0) {
        throw ValidationError("avg_pool2d: factor " + std::to_string(factor) + " must divide " +
                              shape_str(x.shape()));
    }
    if (factor == 1) {
        Tensor<T> out = Tensor<T>::from(x.shape(), x.values());
        if (auto* tp = tape_for<T>({&x})) {
            mark_output(out);
            tp->record({out.node()}, [x, out]() mutable {
                const T* pd = out.grad_values().data();
                T* gx = x.grad();
                const int64_t n = x.numel();
                for (int64_t i = 0; i < n; ++i) gx[i] += pd[i];
            });
        }
        return out;
    }
    const int64_t BC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t oh = H / factor, ow = W / factor;
    const T inv = T(1) / static_cast<T>(factor * factor);
    Tensor<T> out({x.dim(0), x.dim(1), oh, ow});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t i = 0; i < BC; ++i) {
        const T* plane = px + i * H * W;
        T* oplane = po + i * oh * ow;
        for (int64_t y = 0; y < oh; ++y) {
            for (int64_t xx = 0; xx < ow; ++xx) {
                T s = T(0);
                for (int64_t dy = 0; dy < factor; ++dy) {
                    for (int64_t dx = 0; dx < factor; ++dx) {
                        s += plane[(y * factor + dy) * W + (xx * factor + dx)];
                    }
                }
                oplane[y * ow + xx] = s * inv;
            }
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, BC, H, W, oh, ow, factor, inv]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t i = 0; i < BC; ++i) {
                const T* dplane = pd + i * oh * ow;
                T* gplane = gx + i * H * W;
                for (int64_t y = 0; y < oh; ++y) {
                    for (int64_t xx = 0; xx < ow; ++xx) {
                        const T d = dplane[y * ow + xx] * inv;
                        for (int64_t dy = 0; dy < factor; ++dy) {
                            for (int64_t dx = 0; dx < factor; ++dx) {
                                gplane[(y * factor + dy) * W + (xx * factor + dx)] += d;
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

// Sum over all non-batch dims: [B,...] -> [B].
template <typename T>
Tensor<T> sum_per_sample(const Tensor<T>& x) {
    if (x.rank() < 1) throw ValidationError("sum_per_sample expects a batched tensor");
    const int64_t B = x.dim(0);
    const int64_t inner = x.numel() / B;
    Tensor<T> out({B});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t b = 0; b < B; ++b) {
        T s = T(0);
        for (int64_t i = 0; i < inner; ++i) s += px[b * inner + i];
        po[b] = s;
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, B, inner]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t b = 0; b < B; ++b) {
                for (int64_t i = 0; i < inner; ++i) gx[b * inner + i] += pd[b];
            }
        });
    }
    return out;
}

}  // namespace gcrp
