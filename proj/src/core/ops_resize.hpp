#pragma once

#include <cmath>

#include "core/tensor.hpp"

namespace gcrp {

// Half-pixel sampling: src = (dst + 0.5) * in/out - 0.5.

template <typename T>
Tensor<T> resize_nearest(const Tensor<T>& x, int64_t oh, int64_t ow) {
    if (x.rank() != 4) throw ValidationError("resize expects [B,C,H,W]");
    if (oh < 1 || ow < 1) throw ValidationError("resize target must be positive");
    const int64_t BC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor<T> out({x.dim(0), x.dim(1), oh, ow});
    const double sy = static_cast<double>(H) / static_cast<double>(oh);
    const double sx = static_cast<double>(W) / static_cast<double>(ow);
    std::vector<int64_t> ys(static_cast<size_t>(oh)), xs(static_cast<size_t>(ow));
    for (int64_t y = 0; y < oh; ++y) {
        ys[static_cast<size_t>(y)] = std::min<int64_t>(
            H - 1, static_cast<int64_t>(std::floor((static_cast<double>(y) + 0.5) * sy)));
    }
    for (int64_t xi = 0; xi < ow; ++xi) {
        xs[static_cast<size_t>(xi)] = std::min<int64_t>(
            W - 1, static_cast<int64_t>(std::floor((static_cast<double>(xi) + 0.5) * sx)));
    }
    const T* px = x.data();
    T* po = out.data();
    for (int64_t i = 0; i < BC; ++i) {
        const T* plane = px + i * H * W;
        T* oplane = po + i * oh * ow;
        for (int64_t y = 0; y < oh; ++y) {
            for (int64_t xi = 0; xi < ow; ++xi) {
                oplane[y * ow + xi] = plane[ys[static_cast<size_t>(y)] * W + xs[static_cast<size_t>(xi)]];
            }
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, ys, xs, BC, H, W, oh, ow]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t i = 0; i < BC; ++i) {
                const T* dplane = pd + i * oh * ow;
                T* gplane = gx + i * H * W;
                for (int64_t y = 0; y < oh; ++y) {
                    for (int64_t xi = 0; xi < ow; ++xi) {
                        gplane[ys[static_cast<size_t>(y)] * W + xs[static_cast<size_t>(xi)]] +=
                            dplane[y * ow + xi];
                    }
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int64_t oh, int64_t ow) {
    if (x.rank() != 4) throw ValidationError("resize expects [B,C,H,W]");
    if (oh < 1 || ow < 1) throw ValidationError("resize target must be positive");
    const int64_t BC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor<T> out({x.dim(0), x.dim(1), oh, ow});
    struct Lerp {
        int64_t lo, hi;
        T w_hi;
    };
    auto make_axis = [](int64_t in, int64_t outn) {
        std::vector<Lerp> v(static_cast<size_t>(outn));
        const double scale = static_cast<double>(in) / static_cast<double>(outn);
        for (int64_t d = 0; d < outn; ++d) {
            double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
            if (src < 0) src = 0;
            const double fl = std::floor(src);
            int64_t lo = static_cast<int64_t>(fl);
            if (lo > in - 1) lo = in - 1;
            const int64_t hi = lo + 1 > in - 1 ? in - 1 : lo + 1;
            v[static_cast<size_t>(d)] = {lo, hi, static_cast<T>(src - fl)};
        }
        return v;
    };
    const auto ys = make_axis(H, oh);
    const auto xs = make_axis(W, ow);
    const T* px = x.data();
    T* po = out.data();
    for (int64_t i = 0; i < BC; ++i) {
        const T* plane = px + i * H * W;
        T* oplane = po + i * oh * ow;
        for (int64_t y = 0; y < oh; ++y) {
            const Lerp& ly = ys[static_cast<size_t>(y)];
            for (int64_t xi = 0; xi < ow; ++xi) {
                const Lerp& lx = xs[static_cast<size_t>(xi)];
                const T top = plane[ly.lo * W + lx.lo] * (T(1) - lx.w_hi) + plane[ly.lo * W + lx.hi] * lx.w_hi;
                const T bot = plane[ly.hi * W + lx.lo] * (T(1) - lx.w_hi) + plane[ly.hi * W + lx.hi] * lx.w_hi;
                oplane[y * ow + xi] = top * (T(1) - ly.w_hi) + bot * ly.w_hi;
            }
        }
    }
    if (auto* tp = tape_for<T>({&x})) {
        mark_output(out);
        tp->record({out.node()}, [x, out, ys, xs, BC, H, W, oh, ow]() mutable {
            const T* pd = out.grad_values().data();
            T* gx = x.grad();
            for (int64_t i = 0; i < BC; ++i) {
                const T* dplane = pd + i * oh * ow;
                T* gplane = gx + i * H * W;
                for (int64_t y = 0; y < oh; ++y) {
                    const Lerp& ly = ys[static_cast<size_t>(y)];
                    for (int64_t xi = 0; xi < ow; ++xi) {
                        const Lerp& lx = xs[static_cast<size_t>(xi)];
                        const T d = dplane[y * ow + xi];
                        gplane[ly.lo * W + lx.lo] += d * (T(1) - ly.w_hi) * (T(1) - lx.w_hi);
                        gplane[ly.lo * W + lx.hi] += d * (T(1) - ly.w_hi) * lx.w_hi;
                        gplane[ly.hi * W + lx.lo] += d * ly.w_hi * (T(1) - lx.w_hi);
                        gplane[ly.hi * W + lx.hi] += d * ly.w_hi * lx.w_hi;
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace gcrp
