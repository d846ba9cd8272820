#pragma once

#include "core/tensor.hpp"
#include "support/parallel.hpp"

namespace gcrp {

namespace detail {

// C[M,N] = A[M,K] * B[K,N], ikj order, rows of C split across threads.
// Each output row is written by exactly one thread, so results do not
// depend on the thread count.
template <typename T>
void matmul_kernel(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate) {
    parallel_for(m, [=](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            T* crow = c + i * n;
            if (!accumulate) {
                for (int64_t j = 0; j < n; ++j) crow[j] = T(0);
            }
            const T* arow = a + i * k;
            for (int64_t p = 0; p < k; ++p) {
                const T av = arow[p];
                if (av == T(0)) continue;
                const T* brow = b + p * n;
                for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    });
}

template <typename T>
std::vector<T> transpose2d(const T* src, int64_t rows, int64_t cols) {
    std::vector<T> out(static_cast<size_t>(rows * cols));
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) out[static_cast<size_t>(j * rows + i)] = src[i * cols + j];
    }
    return out;
}

}  // namespace detail

// 2-D matrix product with optional transposes: (ta ? a^T : a) * (tb ? b^T : b).
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool ta = false, bool tb = false) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ValidationError("matmul expects 2-D tensors, got " + shape_str(a.shape()) + " and " +
                              shape_str(b.shape()));
    }
    const int64_t m = ta ? a.dim(1) : a.dim(0);
    const int64_t k = ta ? a.dim(0) : a.dim(1);
    const int64_t kb = tb ? b.dim(1) : b.dim(0);
    const int64_t n = tb ? b.dim(0) : b.dim(1);
    if (k != kb) {
        throw ValidationError("matmul inner dims: " + shape_str(a.shape()) + " x " +
                              shape_str(b.shape()));
    }
    std::vector<T> at, bt;
    const T* pa = a.data();
    const T* pb = b.data();
    if (ta) {
        at = detail::transpose2d(pa, a.dim(0), a.dim(1));
        pa = at.data();
    }
    if (tb) {
        bt = detail::transpose2d(pb, b.dim(0), b.dim(1));
        pb = bt.data();
    }
    Tensor<T> out({m, n});
    detail::matmul_kernel(pa, pb, out.data(), m, k, n, false);
    if (auto* tp = tape_for<T>({&a, &b})) {
        mark_output(out);
        tp->record({out.node()}, [a, b, out, ta, tb, m, k, n]() mutable {
            const T* pd = out.grad_values().data();
            // Gradients for the effective (post-transpose) operands, mapped
            // back through the same transposes.
            if (a.needs_grad()) {
                std::vector<T> beff;
                const T* pb = b.data();
                if (!tb) {
                    beff = detail::transpose2d(pb, k, n);
                    pb = beff.data();
                }
                std::vector<T> da(static_cast<size_t>(m * k));
                detail::matmul_kernel(pd, pb, da.data(), m, n, k, false);
                T* ga = a.grad();
                if (ta) {
                    for (int64_t i = 0; i < m; ++i) {
                        for (int64_t p = 0; p < k; ++p) ga[p * m + i] += da[static_cast<size_t>(i * k + p)];
                    }
                } else {
                    for (int64_t i = 0; i < m * k; ++i) ga[i] += da[static_cast<size_t>(i)];
                }
            }
            if (b.needs_grad()) {
                std::vector<T> aeff;
                const T* pa = a.data();
                if (!ta) {
                    aeff = detail::transpose2d(pa, m, k);
                    pa = aeff.data();
                }
                std::vector<T> db(static_cast<size_t>(k * n));
                detail::matmul_kernel(pa, pd, db.data(), k, m, n, false);
                T* gb = b.grad();
                if (tb) {
                    for (int64_t p = 0; p < k; ++p) {
                        for (int64_t j = 0; j < n; ++j) gb[j * k + p] += db[static_cast<size_t>(p * n + j)];
                    }
                } else {
                    for (int64_t i = 0; i < k * n; ++i) gb[i] += db[static_cast<size_t>(i)];
                }
            }
        });
    }
    return out;
}

// x[..., K] * w[K, N] + bias[N]; leading dims flatten to rows.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias = nullptr) {
    if (x.rank() < 1 || w.rank() != 2) throw ValidationError("linear expects x[...,K], w[K,N]");
    const int64_t k = x.dim(x.rank() - 1);
    if (k != w.dim(0)) {
        throw ValidationError("linear: inner dim " + std::to_string(k) + " vs w " +
                              shape_str(w.shape()));
    }
    const int64_t n = w.dim(1);
    const int64_t m = x.numel() / k;
    if (bias && (bias->rank() != 1 || bias->dim(0) != n)) {
        throw ValidationError("linear bias must be [N]");
    }
    Shape out_shape = x.shape();
    out_shape.back() = n;
    Tensor<T> out(out_shape);
    detail::matmul_kernel(x.data(), w.data(), out.data(), m, k, n, false);
    if (bias) {
        T* po = out.data();
        const T* pc = bias->data();
        for (int64_t i = 0; i < m; ++i) {
            for (int64_t j = 0; j < n; ++j) po[i * n + j] += pc[j];
        }
    }
    Tensor<T> bcopy = bias ? *bias : Tensor<T>();
    const bool need = x.needs_grad() || w.needs_grad() || (bias && bias->needs_grad());
    if (auto* tp = Tape<T>::active(); tp && need) {
        mark_output(out);
        tp->record({out.node()}, [x, w, bcopy, out, m, k, n]() mutable {
            const T* pd = out.grad_values().data();
            if (x.needs_grad()) {
                std::vector<T> wt = detail::transpose2d(w.data(), k, n);
                detail::matmul_kernel(pd, wt.data(), x.grad(), m, n, k, true);
            }
            if (w.needs_grad()) {
                std::vector<T> xt = detail::transpose2d(x.data(), m, k);
                detail::matmul_kernel(xt.data(), pd, w.grad(), k, m, n, true);
            }
            if (bcopy.valid() && bcopy.needs_grad()) {
                T* gb = bcopy.grad();
                for (int64_t i = 0; i < m; ++i) {
                    for (int64_t j = 0; j < n; ++j) gb[j] += pd[i * n + j];
                }
            }
        });
    }
    return out;
}

}  // namespace gcrp
