#pragma once

#include <cmath>

#include "core/tensor.hpp"

namespace gcrp {

namespace detail {

// Right-aligned broadcast plan. strides are per output dim in element units,
// 0 where the input is broadcast along that dim.
struct BcastPlan {
    Shape out;
    std::vector<int64_t> div;  // suffix products for index decomposition
    std::vector<int64_t> sa;
    std::vector<int64_t> sb;
    bool same = false;
};

inline BcastPlan make_bcast(const Shape& a, const Shape& b) {
    BcastPlan p;
    if (a == b) {
        p.out = a;
        p.same = true;
        return p;
    }
    const int ra = static_cast<int>(a.size());
    const int rb = static_cast<int>(b.size());
    const int r = ra > rb ? ra : rb;
    p.out.resize(static_cast<size_t>(r));
    for (int d = 0; d < r; ++d) {
        const int64_t da = d >= r - ra ? a[static_cast<size_t>(d - (r - ra))] : 1;
        const int64_t db = d >= r - rb ? b[static_cast<size_t>(d - (r - rb))] : 1;
        if (da != db && da != 1 && db != 1) {
            throw ValidationError("cannot broadcast " + shape_str(a) + " with " + shape_str(b));
        }
        p.out[static_cast<size_t>(d)] = da > db ? da : db;
    }
    auto strides_of = [r](const Shape& s) {
        std::vector<int64_t> st(static_cast<size_t>(r), 0);
        const int rs = static_cast<int>(s.size());
        int64_t acc = 1;
        for (int d = rs - 1; d >= 0; --d) {
            st[static_cast<size_t>(d + (r - rs))] = s[static_cast<size_t>(d)] == 1 ? 0 : acc;
            acc *= s[static_cast<size_t>(d)];
        }
        return st;
    };
    p.sa = strides_of(a);
    p.sb = strides_of(b);
    p.div.assign(static_cast<size_t>(r), 1);
    for (int d = r - 2; d >= 0; --d) {
        p.div[static_cast<size_t>(d)] = p.div[static_cast<size_t>(d + 1)] * p.out[static_cast<size_t>(d + 1)];
    }
    return p;
}

inline void bcast_offsets(const BcastPlan& p, int64_t i, int64_t& oa, int64_t& ob) {
    oa = 0;
    ob = 0;
    int64_t rem = i;
    for (size_t d = 0; d < p.div.size(); ++d) {
        const int64_t c = rem / p.div[d];
        rem -= c * p.div[d];
        oa += c * p.sa[d];
        ob += c * p.sb[d];
    }
}

}  // namespace detail

// FWD: out = f(a, b). DA/DB: grad contribution given (av, bv, dout).
template <typename T, class F, class DA, class DB>
Tensor<T> binary_op(const Tensor<T>& a, const Tensor<T>& b, F f, DA da_fn, DB db_fn) {
    auto plan = detail::make_bcast(a.shape(), b.shape());
    Tensor<T> out(plan.out);
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.data();
    const int64_t n = out.numel();
    if (plan.same) {
        for (int64_t i = 0; i < n; ++i) po[i] = f(pa[i], pb[i]);
    } else {
        for (int64_t i = 0; i < n; ++i) {
            int64_t oa, ob;
            detail::bcast_offsets(plan, i, oa, ob);
            po[i] = f(pa[oa], pb[ob]);
        }
    }
    if (auto* tp = tape_for<T>({&a, &b})) {
        mark_output(out);
        tp->record({out.node()}, [a, b, out, plan, da_fn, db_fn]() mutable {
            const T* pa = a.data();
            const T* pb = b.data();
            const T* pd = out.grad_values().data();
            const int64_t n = out.numel();
            T* ga = a.needs_grad() ? a.grad() : nullptr;
            T* gb = b.needs_grad() ? b.grad() : nullptr;
            if (plan.same) {
                for (int64_t i = 0; i < n; ++i) {
                    if (ga) ga[i] += da_fn(pa[i], pb[i], pd[i]);
                    if (gb) gb[i] += db_fn(pa[i], pb[i], pd[i]);
                }
            } else {
                for (int64_t i = 0; i < n; ++i) {
                    int64_t oa, ob;
                    detail::bcast_offsets(plan, i, oa, ob);
                    if (ga) ga[oa] += da_fn(pa[oa], pb[ob], pd[i]);
                    if (gb) gb[ob] += db_fn(pa[oa], pb[ob], pd[i]);
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, [](T x, T y) { return x + y; }, [](T, T, T d) { return d; }, [](T, T, T d) { return d; });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, [](T x, T y) { return x - y; }, [](T, T, T d) { return d; }, [](T, T, T d) { return -d; });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, [](T x, T y) { return x * y; }, [](T, T y, T d) { return d * y; },
        [](T x, T, T d) { return d * x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, [](T x, T y) { return x / y; }, [](T, T y, T d) { return d / y; },
        [](T x, T y, T d) { return -d * x / (y * y); });
}

// F: y = f(x). DF: dx contribution given (x, y, dy).
template <typename T, class F, class DF>
Tensor<T> unary_op(const Tensor<T>& x, F f, DF df) {
    Tensor<T> out(x.shape());
    const T* px = x.data();
    T* po = out.data();
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) po[i] = f(px[i]);
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, df]() mutable {
            const T* px = x.data();
            const T* py = out.data();
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            const int64_t n = x.numel();
            for (int64_t i = 0; i < n; ++i) gx[i] += df(px[i], py[i], pd[i]);
        });
    }
    return out;
}

template <typename T>
Tensor<T> neg(const Tensor<T>& x) {
    return unary_op(
        x, [](T v) { return -v; }, [](T, T, T d) { return -d; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T c) {
    return unary_op(
        x, [c](T v) { return v + c; }, [](T, T, T d) { return d; });
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& x, T c) {
    return unary_op(
        x, [c](T v) { return v * c; }, [c](T, T, T d) { return d * c; });
}

template <typename T>
Tensor<T> exp_op(const Tensor<T>& x) {
    return unary_op(
        x, [](T v) { return std::exp(v); }, [](T, T y, T d) { return d * y; });
}

template <typename T>
Tensor<T> log_op(const Tensor<T>& x) {
    return unary_op(
        x, [](T v) { return std::log(v); }, [](T v, T, T d) { return d / v; });
}

// Zero gradient outside [lo, hi]; boundary counts as inside.
template <typename T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
    return unary_op(
        x, [lo, hi](T v) { return v < lo ? lo : (v > hi ? hi : v); },
        [lo, hi](T v, T, T d) { return (v >= lo && v <= hi) ? d : T(0); });
}

template <typename T>
inline T sigmoid_val(T v) {
    return v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    return unary_op(
        x, [](T v) { return sigmoid_val(v); }, [](T, T y, T d) { return d * y * (T(1) - y); });
}

template <typename T>
Tensor<T> silu(const Tensor<T>& x) {
    return unary_op(
        x, [](T v) { return v * sigmoid_val(v); },
        [](T v, T, T d) {
            const T s = sigmoid_val(v);
            return d * s * (T(1) + v * (T(1) - s));
        });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope = T(0.01)) {
    return unary_op(
        x, [slope](T v) { return v > T(0) ? v : slope * v; },
        [slope](T v, T, T d) { return v > T(0) ? d : slope * d; });
}

template <typename T>
Tensor<T> elu(const Tensor<T>& x, T alpha = T(1)) {
    return unary_op(
        x, [alpha](T v) { return v > T(0) ? v : alpha * (std::exp(v) - T(1)); },
        [alpha](T v, T y, T d) { return v > T(0) ? d : d * (y + alpha); });
}

template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
    return unary_op(
        x, [](T v) { return (v > T(0) ? v : T(0)) + std::log1p(std::exp(-std::abs(v))); },
        [](T v, T, T d) { return d * sigmoid_val(v); });
}

namespace detail {

// outer/len/inner decomposition of shape around axis.
struct AxisPlan {
    int64_t outer, len, inner;
};

inline AxisPlan make_axis(const Shape& s, int axis) {
    const int r = static_cast<int>(s.size());
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) throw ValidationError("axis out of range for " + shape_str(s));
    AxisPlan p{1, s[static_cast<size_t>(axis)], 1};
    for (int d = 0; d < axis; ++d) p.outer *= s[static_cast<size_t>(d)];
    for (int d = axis + 1; d < r; ++d) p.inner *= s[static_cast<size_t>(d)];
    return p;
}

}  // namespace detail

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
    auto p = detail::make_axis(x.shape(), axis);
    Tensor<T> out(x.shape());
    const T* px = x.data();
    T* po = out.data();
    for (int64_t o = 0; o < p.outer; ++o) {
        for (int64_t in = 0; in < p.inner; ++in) {
            const int64_t base = o * p.len * p.inner + in;
            T m = px[base];
            for (int64_t k = 1; k < p.len; ++k) m = std::max(m, px[base + k * p.inner]);
            T sum = T(0);
            for (int64_t k = 0; k < p.len; ++k) {
                const T e = std::exp(px[base + k * p.inner] - m);
                po[base + k * p.inner] = e;
                sum += e;
            }
            for (int64_t k = 0; k < p.len; ++k) po[base + k * p.inner] /= sum;
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, p]() mutable {
            const T* py = out.data();
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t o = 0; o < p.outer; ++o) {
                for (int64_t in = 0; in < p.inner; ++in) {
                    const int64_t base = o * p.len * p.inner + in;
                    T dot = T(0);
                    for (int64_t k = 0; k < p.len; ++k) {
                        dot += pd[base + k * p.inner] * py[base + k * p.inner];
                    }
                    for (int64_t k = 0; k < p.len; ++k) {
                        const int64_t i = base + k * p.inner;
                        gx[i] += py[i] * (pd[i] - dot);
                    }
                }
            }
        });
    }
    return out;
}

// Normalizes each slice along axis to zero mean, unit variance (biased
// variance, no affine terms; callers add their own scale and shift).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, int axis, T eps = T(1e-5)) {
    auto p = detail::make_axis(x.shape(), axis);
    Tensor<T> out(x.shape());
    std::vector<T> inv_std(static_cast<size_t>(p.outer * p.inner));
    const T* px = x.data();
    T* po = out.data();
    for (int64_t o = 0; o < p.outer; ++o) {
        for (int64_t in = 0; in < p.inner; ++in) {
            const int64_t base = o * p.len * p.inner + in;
            T mu = T(0);
            for (int64_t k = 0; k < p.len; ++k) mu += px[base + k * p.inner];
            mu /= static_cast<T>(p.len);
            T var = T(0);
            for (int64_t k = 0; k < p.len; ++k) {
                const T c = px[base + k * p.inner] - mu;
                var += c * c;
            }
            var /= static_cast<T>(p.len);
            const T inv = T(1) / std::sqrt(var + eps);
            inv_std[static_cast<size_t>(o * p.inner + in)] = inv;
            for (int64_t k = 0; k < p.len; ++k) {
                po[base + k * p.inner] = (px[base + k * p.inner] - mu) * inv;
            }
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, p, inv_std = std::move(inv_std)]() mutable {
            const T* py = out.data();
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t o = 0; o < p.outer; ++o) {
                for (int64_t in = 0; in < p.inner; ++in) {
                    const int64_t base = o * p.len * p.inner + in;
                    const T inv = inv_std[static_cast<size_t>(o * p.inner + in)];
                    T mean_d = T(0), mean_dy = T(0);
                    for (int64_t k = 0; k < p.len; ++k) {
                        const int64_t i = base + k * p.inner;
                        mean_d += pd[i];
                        mean_dy += pd[i] * py[i];
                    }
                    mean_d /= static_cast<T>(p.len);
                    mean_dy /= static_cast<T>(p.len);
                    for (int64_t k = 0; k < p.len; ++k) {
                        const int64_t i = base + k * p.inner;
                        gx[i] += inv * (pd[i] - mean_d - py[i] * mean_dy);
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace gcrp
