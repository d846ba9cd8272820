#pragma once

#include <cstring>

#include "core/tensor.hpp"

namespace gcrp {

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape new_shape) {
    if (shape_numel(new_shape) != x.numel()) {
        throw ValidationError("reshape " + shape_str(x.shape()) + " -> " + shape_str(new_shape));
    }
    Tensor<T> out = Tensor<T>::from(std::move(new_shape), x.values());
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

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis) {
    if (xs.empty()) throw ValidationError("concat of zero tensors");
    const Shape& s0 = xs[0].shape();
    const int r = static_cast<int>(s0.size());
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) throw ValidationError("concat axis out of range");
    Shape out_shape = s0;
    out_shape[static_cast<size_t>(axis)] = 0;
    for (const auto& x : xs) {
        if (x.rank() != r) throw ValidationError("concat rank mismatch");
        for (int d = 0; d < r; ++d) {
            if (d != axis && x.dim(d) != s0[static_cast<size_t>(d)]) {
                throw ValidationError("concat shape mismatch: " + shape_str(x.shape()) + " vs " +
                                      shape_str(s0));
            }
        }
        out_shape[static_cast<size_t>(axis)] += x.dim(axis);
    }
    Tensor<T> out(out_shape);
    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= s0[static_cast<size_t>(d)];
    for (int d = axis + 1; d < r; ++d) inner *= s0[static_cast<size_t>(d)];
    const int64_t out_len = out_shape[static_cast<size_t>(axis)];
    T* po = out.data();
    int64_t off = 0;
    for (const auto& x : xs) {
        const int64_t len = x.dim(axis);
        const T* px = x.data();
        for (int64_t o = 0; o < outer; ++o) {
            std::memcpy(po + (o * out_len + off) * inner, px + o * len * inner,
                        static_cast<size_t>(len * inner) * sizeof(T));
        }
        off += len;
    }
    bool any = false;
    for (const auto& x : xs) any = any || x.needs_grad();
    if (auto* tp = Tape<T>::active(); tp && any) {
        mark_output(out);
        tp->record({out.node()}, [xs, out, outer, inner, out_len, axis]() mutable {
            const T* pd = out.grad_values().data();
            int64_t off = 0;
            for (auto& x : xs) {
                const int64_t len = x.dim(axis);
                if (x.needs_grad()) {
                    T* gx = x.grad();
                    for (int64_t o = 0; o < outer; ++o) {
                        const T* src = pd + (o * out_len + off) * inner;
                        T* dst = gx + o * len * inner;
                        for (int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
                    }
                }
                off += len;
            }
        });
    }
    return out;
}

template <typename T>
std::vector<Tensor<T>> split(const Tensor<T>& x, int axis, const std::vector<int64_t>& sizes) {
    const int r = x.rank();
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) throw ValidationError("split axis out of range");
    int64_t total = 0;
    for (int64_t s : sizes) total += s;
    if (total != x.dim(axis)) {
        throw ValidationError("split sizes sum to " + std::to_string(total) + ", axis has " +
                              std::to_string(x.dim(axis)));
    }
    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= x.dim(d);
    for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
    const int64_t in_len = x.dim(axis);
    std::vector<Tensor<T>> outs;
    const T* px = x.data();
    int64_t off = 0;
    for (int64_t len : sizes) {
        Shape s = x.shape();
        s[static_cast<size_t>(axis)] = len;
        Tensor<T> o(s);
        T* po = o.data();
        for (int64_t ot = 0; ot < outer; ++ot) {
            std::memcpy(po + ot * len * inner, px + (ot * in_len + off) * inner,
                        static_cast<size_t>(len * inner) * sizeof(T));
        }
        outs.push_back(std::move(o));
        off += len;
    }
    if (auto* tp = tape_for<T>({&x})) {
        std::vector<std::shared_ptr<TensorData<T>>> nodes;
        for (auto& o : outs) {
            mark_output(o);
            nodes.push_back(o.node());
        }
        tp->record(std::move(nodes), [x, outs, outer, inner, in_len, axis]() mutable {
            T* gx = x.grad();
            int64_t off = 0;
            for (auto& o : outs) {
                const int64_t len = o.dim(axis);
                if (o.has_grad()) {
                    const T* pd = o.grad_values().data();
                    for (int64_t ot = 0; ot < outer; ++ot) {
                        T* dst = gx + (ot * in_len + off) * inner;
                        const T* src = pd + ot * len * inner;
                        for (int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
                    }
                }
                off += len;
            }
        });
    }
    return outs;
}

// [B,C,H,W] -> [B,L,C] token sequence, token l taken from flat spatial
// position order[l]. order must be a permutation of [0, H*W).
template <typename T>
Tensor<T> gather_spatial(const Tensor<T>& x, const std::vector<int64_t>& order) {
    if (x.rank() != 4) throw ValidationError("gather_spatial expects [B,C,H,W]");
    const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    const int64_t L = static_cast<int64_t>(order.size());
    if (L != HW) throw ValidationError("scan order length != H*W");
    Tensor<T> out({B, L, C});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t b = 0; b < B; ++b) {
        for (int64_t l = 0; l < L; ++l) {
            const int64_t pos = order[static_cast<size_t>(l)];
            for (int64_t c = 0; c < C; ++c) {
                po[(b * L + l) * C + c] = px[(b * C + c) * HW + pos];
            }
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, order, B, C, HW, L]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t b = 0; b < B; ++b) {
                for (int64_t l = 0; l < L; ++l) {
                    const int64_t pos = order[static_cast<size_t>(l)];
                    for (int64_t c = 0; c < C; ++c) {
                        gx[(b * C + c) * HW + pos] += pd[(b * L + l) * C + c];
                    }
                }
            }
        });
    }
    return out;
}

// Inverse of gather_spatial: token l lands at flat position order[l].
template <typename T>
Tensor<T> scatter_spatial(const Tensor<T>& x, const std::vector<int64_t>& order, int64_t h, int64_t w) {
    if (x.rank() != 3) throw ValidationError("scatter_spatial expects [B,L,C]");
    const int64_t B = x.dim(0), L = x.dim(1), C = x.dim(2);
    if (L != h * w) throw ValidationError("scatter_spatial: L != h*w");
    Tensor<T> out({B, C, h, w});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t b = 0; b < B; ++b) {
        for (int64_t l = 0; l < L; ++l) {
            const int64_t pos = order[static_cast<size_t>(l)];
            for (int64_t c = 0; c < C; ++c) {
                po[(b * C + c) * L + pos] = px[(b * L + l) * C + c];
            }
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, order, B, C, L]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t b = 0; b < B; ++b) {
                for (int64_t l = 0; l < L; ++l) {
                    const int64_t pos = order[static_cast<size_t>(l)];
                    for (int64_t c = 0; c < C; ++c) {
                        gx[(b * L + l) * C + c] += pd[(b * C + c) * L + pos];
                    }
                }
            }
        });
    }
    return out;
}

// Row lookup with repeats allowed: out[m,:] = x[idx[m],:].
template <typename T>
Tensor<T> index_rows(const Tensor<T>& x, const std::vector<int64_t>& idx) {
    if (x.rank() != 2) throw ValidationError("index_rows expects [N,D]");
    const int64_t N = x.dim(0), D = x.dim(1);
    const int64_t M = static_cast<int64_t>(idx.size());
    Tensor<T> out({M, D});
    const T* px = x.data();
    T* po = out.data();
    for (int64_t m = 0; m < M; ++m) {
        const int64_t r = idx[static_cast<size_t>(m)];
        if (r < 0 || r >= N) throw ValidationError("index_rows: row out of range");
        std::memcpy(po + m * D, px + r * D, static_cast<size_t>(D) * sizeof(T));
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, idx, D]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            const int64_t M = static_cast<int64_t>(idx.size());
            for (int64_t m = 0; m < M; ++m) {
                T* dst = gx + idx[static_cast<size_t>(m)] * D;
                const T* src = pd + m * D;
                for (int64_t d = 0; d < D; ++d) dst[d] += src[d];
            }
        });
    }
    return out;
}

}  // namespace gcrp
