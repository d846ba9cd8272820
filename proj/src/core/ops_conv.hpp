#pragma once

#include <cstring>

#include "core/ops_linalg.hpp"
#include "core/tensor.hpp"
#include "support/parallel.hpp"

namespace gcrp {

namespace detail {

struct ConvGeom {
    int64_t cin, h, w;      // image side
    int64_t kh, kw;         // kernel
    int64_t stride, pad;
    int64_t oh, ow;         // mapped side
};

inline ConvGeom conv_geom(int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw, int64_t stride,
                          int64_t pad) {
    ConvGeom g{cin, h, w, kh, kw, stride, pad, 0, 0};
    g.oh = (h + 2 * pad - kh) / stride + 1;
    g.ow = (w + 2 * pad - kw) / stride + 1;
    if (g.oh < 1 || g.ow < 1) throw ValidationError("conv output would be empty");
    return g;
}

// col[(c*kh+i)*kw+j, oy*ow+ox] = x[c, oy*s-p+i, ox*s-p+j], zero outside.
template <typename T>
void im2col(const T* x, const ConvGeom& g, T* col) {
    const int64_t ohw = g.oh * g.ow;
    for (int64_t c = 0; c < g.cin; ++c) {
        const T* plane = x + c * g.h * g.w;
        for (int64_t i = 0; i < g.kh; ++i) {
            for (int64_t j = 0; j < g.kw; ++j) {
                T* crow = col + ((c * g.kh + i) * g.kw + j) * ohw;
                for (int64_t oy = 0; oy < g.oh; ++oy) {
                    const int64_t y = oy * g.stride - g.pad + i;
                    if (y < 0 || y >= g.h) {
                        std::memset(crow + oy * g.ow, 0, static_cast<size_t>(g.ow) * sizeof(T));
                        continue;
                    }
                    for (int64_t ox = 0; ox < g.ow; ++ox) {
                        const int64_t xx = ox * g.stride - g.pad + j;
                        crow[oy * g.ow + ox] = (xx >= 0 && xx < g.w) ? plane[y * g.w + xx] : T(0);
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters col entries back into (accumulating) x.
template <typename T>
void col2im(const T* col, const ConvGeom& g, T* x) {
    const int64_t ohw = g.oh * g.ow;
    for (int64_t c = 0; c < g.cin; ++c) {
        T* plane = x + c * g.h * g.w;
        for (int64_t i = 0; i < g.kh; ++i) {
            for (int64_t j = 0; j < g.kw; ++j) {
                const T* crow = col + ((c * g.kh + i) * g.kw + j) * ohw;
                for (int64_t oy = 0; oy < g.oh; ++oy) {
                    const int64_t y = oy * g.stride - g.pad + i;
                    if (y < 0 || y >= g.h) continue;
                    for (int64_t ox = 0; ox < g.ow; ++ox) {
                        const int64_t xx = ox * g.stride - g.pad + j;
                        if (xx >= 0 && xx < g.w) plane[y * g.w + xx] += crow[oy * g.ow + ox];
                    }
                }
            }
        }
    }
}

}  // namespace detail

// x[B,Cin,H,W] * w[Cout,Cin,kh,kw] (+ bias[Cout]) -> [B,Cout,OH,OW].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias, int64_t stride,
                 int64_t pad) {
    if (x.rank() != 4 || w.rank() != 4) throw ValidationError("conv2d expects x[B,C,H,W], w[O,C,kh,kw]");
    if (x.dim(1) != w.dim(1)) {
        throw ValidationError("conv2d channels: x " + shape_str(x.shape()) + " w " + shape_str(w.shape()));
    }
    const int64_t B = x.dim(0), cout = w.dim(0);
    auto g = detail::conv_geom(x.dim(1), x.dim(2), x.dim(3), w.dim(2), w.dim(3), stride, pad);
    const int64_t ckk = g.cin * g.kh * g.kw;
    const int64_t ohw = g.oh * g.ow;
    if (bias && (bias->rank() != 1 || bias->dim(0) != cout)) throw ValidationError("conv2d bias must be [Cout]");
    Tensor<T> out({B, cout, g.oh, g.ow});
    std::vector<T> col(static_cast<size_t>(ckk * ohw));
    for (int64_t b = 0; b < B; ++b) {
        detail::im2col(x.data() + b * g.cin * g.h * g.w, g, col.data());
        detail::matmul_kernel(w.data(), col.data(), out.data() + b * cout * ohw, cout, ckk, ohw, false);
    }
    if (bias) {
        T* po = out.data();
        const T* pc = bias->data();
        for (int64_t b = 0; b < B; ++b) {
            for (int64_t c = 0; c < cout; ++c) {
                T* row = po + (b * cout + c) * ohw;
                for (int64_t i = 0; i < ohw; ++i) row[i] += pc[c];
            }
        }
    }
    Tensor<T> bcopy = bias ? *bias : Tensor<T>();
    const bool need = x.needs_grad() || w.needs_grad() || (bias && bias->needs_grad());
    if (auto* tp = Tape<T>::active(); tp && need) {
        mark_output(out);
        tp->record({out.node()}, [x, w, bcopy, out, g, B, cout, ckk, ohw]() mutable {
            const T* pd = out.grad_values().data();
            std::vector<T> col(static_cast<size_t>(ckk * ohw));
            std::vector<T> dcol;
            std::vector<T> wt;
            if (x.needs_grad()) {
                dcol.resize(static_cast<size_t>(ckk * ohw));
                wt = detail::transpose2d(w.data(), cout, ckk);
            }
            for (int64_t b = 0; b < B; ++b) {
                const T* dy = pd + b * cout * ohw;
                if (w.needs_grad() || x.needs_grad()) {
                    detail::im2col(x.data() + b * g.cin * g.h * g.w, g, col.data());
                }
                if (w.needs_grad()) {
                    std::vector<T> colt = detail::transpose2d(col.data(), ckk, ohw);
                    detail::matmul_kernel(dy, colt.data(), w.grad(), cout, ohw, ckk, true);
                }
                if (x.needs_grad()) {
                    detail::matmul_kernel(wt.data(), dy, dcol.data(), ckk, cout, ohw, false);
                    detail::col2im(dcol.data(), g, x.grad() + b * g.cin * g.h * g.w);
                }
            }
            if (bcopy.valid() && bcopy.needs_grad()) {
                T* gb = bcopy.grad();
                for (int64_t b = 0; b < B; ++b) {
                    for (int64_t c = 0; c < cout; ++c) {
                        const T* row = pd + (b * cout + c) * ohw;
                        T s = T(0);
                        for (int64_t i = 0; i < ohw; ++i) s += row[i];
                        gb[c] += s;
                    }
                }
            }
        });
    }
    return out;
}

// x[B,Cin,H,W] * w[Cin,Cout,kh,kw] (+ bias[Cout]) -> [B,Cout,OH,OW] with
// OH = (H-1)*stride - 2*pad + kh. Exact adjoint of conv2d over the data path.
template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias,
                           int64_t stride, int64_t pad) {
    if (x.rank() != 4 || w.rank() != 4) {
        throw ValidationError("conv2d_transpose expects x[B,C,H,W], w[C,O,kh,kw]");
    }
    if (x.dim(1) != w.dim(0)) {
        throw ValidationError("conv2d_transpose channels: x " + shape_str(x.shape()) + " w " +
                              shape_str(w.shape()));
    }
    const int64_t B = x.dim(0), cin = x.dim(1), cout = w.dim(1);
    const int64_t h = x.dim(2), wd = x.dim(3);
    const int64_t kh = w.dim(2), kw = w.dim(3);
    const int64_t oh = (h - 1) * stride - 2 * pad + kh;
    const int64_t ow = (wd - 1) * stride - 2 * pad + kw;
    if (oh < 1 || ow < 1) throw ValidationError("conv2d_transpose output would be empty");
    if (bias && (bias->rank() != 1 || bias->dim(0) != cout)) {
        throw ValidationError("conv2d_transpose bias must be [Cout]");
    }
    // Same geometry as a forward conv taking [Cout,OH,OW] down to [Cin,H,W].
    auto g = detail::conv_geom(cout, oh, ow, kh, kw, stride, pad);
    const int64_t okk = cout * kh * kw;
    const int64_t hw = h * wd;
    Tensor<T> out({B, cout, oh, ow});
    std::vector<T> col(static_cast<size_t>(okk * hw));
    std::vector<T> wt = detail::transpose2d(w.data(), cin, okk);
    T* po = out.data();
    for (int64_t b = 0; b < B; ++b) {
        detail::matmul_kernel(wt.data(), x.data() + b * cin * hw, col.data(), okk, cin, hw, false);
        T* plane = po + b * cout * oh * ow;
        std::fill(plane, plane + cout * oh * ow, T(0));
        detail::col2im(col.data(), g, plane);
    }
    if (bias) {
        const T* pc = bias->data();
        for (int64_t b = 0; b < B; ++b) {
            for (int64_t c = 0; c < cout; ++c) {
                T* row = po + (b * cout + c) * oh * ow;
                for (int64_t i = 0; i < oh * ow; ++i) row[i] += pc[c];
            }
        }
    }
    Tensor<T> bcopy = bias ? *bias : Tensor<T>();
    const bool need = x.needs_grad() || w.needs_grad() || (bias && bias->needs_grad());
    if (auto* tp = Tape<T>::active(); tp && need) {
        mark_output(out);
        tp->record({out.node()}, [x, w, bcopy, out, g, B, cin, cout, okk, hw]() mutable {
            const T* pd = out.grad_values().data();
            const int64_t ohw = g.h * g.w;  // output spatial extent
            std::vector<T> col(static_cast<size_t>(okk * hw));
            for (int64_t b = 0; b < B; ++b) {
                detail::im2col(pd + b * cout * ohw, g, col.data());
                if (x.needs_grad()) {
                    detail::matmul_kernel(w.data(), col.data(), x.grad() + b * cin * hw, cin, okk, hw,
                                          true);
                }
                if (w.needs_grad()) {
                    std::vector<T> colt = detail::transpose2d(col.data(), okk, hw);
                    detail::matmul_kernel(x.data() + b * cin * hw, colt.data(), w.grad(), cin, hw, okk,
                                          true);
                }
            }
            if (bcopy.valid() && bcopy.needs_grad()) {
                T* gb = bcopy.grad();
                for (int64_t b = 0; b < B; ++b) {
                    for (int64_t c = 0; c < cout; ++c) {
                        const T* row = pd + (b * cout + c) * ohw;
                        T s = T(0);
                        for (int64_t i = 0; i < ohw; ++i) s += row[i];
                        gb[c] += s;
                    }
                }
            }
        });
    }
    return out;
}

// Per-channel convolution, stride 1, same padding: x[B,C,H,W] * w[C,1,k,k].
template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias = nullptr) {
    if (x.rank() != 4 || w.rank() != 4 || w.dim(1) != 1) {
        throw ValidationError("depthwise_conv2d expects x[B,C,H,W], w[C,1,k,k]");
    }
    if (x.dim(1) != w.dim(0)) throw ValidationError("depthwise_conv2d channel mismatch");
    if (w.dim(2) != w.dim(3) || w.dim(2) % 2 == 0) {
        throw ValidationError("depthwise_conv2d kernel must be odd square");
    }
    const int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t k = w.dim(2), p = k / 2;
    if (bias && (bias->rank() != 1 || bias->dim(0) != C)) throw ValidationError("depthwise bias must be [C]");
    Tensor<T> out(x.shape());
    const T* px = x.data();
    const T* pw = w.data();
    const T* pc = bias ? bias->data() : nullptr;
    T* po = out.data();
    parallel_for(B * C, [=](int64_t lo, int64_t hi) {
        for (int64_t bc = lo; bc < hi; ++bc) {
            const int64_t c = bc % C;
            const T* plane = px + bc * H * W;
            const T* ker = pw + c * k * k;
            T* oplane = po + bc * H * W;
            for (int64_t y = 0; y < H; ++y) {
                for (int64_t x2 = 0; x2 < W; ++x2) {
                    T s = pc ? pc[c] : T(0);
                    for (int64_t i = 0; i < k; ++i) {
                        const int64_t yy = y - p + i;
                        if (yy < 0 || yy >= H) continue;
                        for (int64_t j = 0; j < k; ++j) {
                            const int64_t xx = x2 - p + j;
                            if (xx < 0 || xx >= W) continue;
                            s += ker[i * k + j] * plane[yy * W + xx];
                        }
                    }
                    oplane[y * W + x2] = s;
                }
            }
        }
    });
    Tensor<T> bcopy = bias ? *bias : Tensor<T>();
    const bool need = x.needs_grad() || w.needs_grad() || (bias && bias->needs_grad());
    if (auto* tp = Tape<T>::active(); tp && need) {
        mark_output(out);
        tp->record({out.node()}, [x, w, bcopy, out, B, C, H, W, k, p]() mutable {
            const T* pd = out.grad_values().data();
            const T* px = x.data();
            const T* pw = w.data();
            T* gx = x.needs_grad() ? x.grad() : nullptr;
            T* gw = w.needs_grad() ? w.grad() : nullptr;
            for (int64_t b = 0; b < B; ++b) {
                for (int64_t c = 0; c < C; ++c) {
                    const T* dplane = pd + (b * C + c) * H * W;
                    const T* plane = px + (b * C + c) * H * W;
                    const T* ker = pw + c * k * k;
                    T* gplane = gx ? gx + (b * C + c) * H * W : nullptr;
                    T* gker = gw ? gw + c * k * k : nullptr;
                    for (int64_t y = 0; y < H; ++y) {
                        for (int64_t x2 = 0; x2 < W; ++x2) {
                            const T d = dplane[y * W + x2];
                            if (d == T(0)) continue;
                            for (int64_t i = 0; i < k; ++i) {
                                const int64_t yy = y - p + i;
                                if (yy < 0 || yy >= H) continue;
                                for (int64_t j = 0; j < k; ++j) {
                                    const int64_t xx = x2 - p + j;
                                    if (xx < 0 || xx >= W) continue;
                                    if (gplane) gplane[yy * W + xx] += d * ker[i * k + j];
                                    if (gker) gker[i * k + j] += d * plane[yy * W + xx];
                                }
                            }
                        }
                    }
                }
            }
            if (bcopy.valid() && bcopy.needs_grad()) {
                T* gb = bcopy.grad();
                for (int64_t b = 0; b < B; ++b) {
                    for (int64_t c = 0; c < C; ++c) {
                        const T* row = pd + (b * C + c) * H * W;
                        T s = T(0);
                        for (int64_t i = 0; i < H * W; ++i) s += row[i];
                        gb[c] += s;
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace gcrp
