#pragma once

#include <cmath>

#include "core/tensor.hpp"

namespace gcrp {

// Softmax over contiguous segments of a flat score vector. offsets has one
// entry per segment plus a final end sentinel; segments must be nonempty.
template <typename T>
Tensor<T> segment_softmax(const Tensor<T>& scores, const std::vector<int64_t>& offsets) {
    const int64_t E = scores.numel();
    const int64_t S = static_cast<int64_t>(offsets.size()) - 1;
    if (S < 0 || offsets[0] != 0 || offsets[static_cast<size_t>(S)] != E) {
        throw ValidationError("segment_softmax: bad offsets");
    }
    Tensor<T> out(scores.shape());
    const T* ps = scores.data();
    T* po = out.data();
    for (int64_t s = 0; s < S; ++s) {
        const int64_t lo = offsets[static_cast<size_t>(s)], hi = offsets[static_cast<size_t>(s) + 1];
        if (lo >= hi) throw ValidationError("segment_softmax: empty segment");
        T m = ps[lo];
        for (int64_t e = lo + 1; e < hi; ++e) m = std::max(m, ps[e]);
        T sum = T(0);
        for (int64_t e = lo; e < hi; ++e) {
            po[e] = std::exp(ps[e] - m);
            sum += po[e];
        }
        for (int64_t e = lo; e < hi; ++e) po[e] /= sum;
    }
    if (auto* tp = tape_for<T>({&scores})) {
        mark_output(out);
        tp->record({out.node()}, [scores, out, offsets, S]() mutable {
            const T* py = out.data();
            const T* pd = out.grad_values().data();
            T* gx = scores.grad();
            for (int64_t s = 0; s < S; ++s) {
                const int64_t lo = offsets[static_cast<size_t>(s)], hi = offsets[static_cast<size_t>(s) + 1];
                T dot = T(0);
                for (int64_t e = lo; e < hi; ++e) dot += pd[e] * py[e];
                for (int64_t e = lo; e < hi; ++e) gx[e] += py[e] * (pd[e] - dot);
            }
        });
    }
    return out;
}

// out[i,:] = sum over segment i of alpha[e] * feats[src[e],:]. Edge e sits in
// the segment of its destination node; summation follows edge order, so a
// relabeled graph with identically ordered adjacency lists reproduces results
// bit for bit.
template <typename T>
Tensor<T> weighted_gather_sum(const Tensor<T>& alpha, const Tensor<T>& feats,
                              const std::vector<int64_t>& src, const std::vector<int64_t>& offsets) {
    if (feats.rank() != 2) throw ValidationError("weighted_gather_sum expects feats [N,D]");
    const int64_t E = alpha.numel();
    const int64_t S = static_cast<int64_t>(offsets.size()) - 1;
    const int64_t D = feats.dim(1);
    if (static_cast<int64_t>(src.size()) != E || S < 0 || offsets[static_cast<size_t>(S)] != E) {
        throw ValidationError("weighted_gather_sum: edge arrays disagree");
    }
    Tensor<T> out({S, D});
    const T* pa = alpha.data();
    const T* pf = feats.data();
    T* po = out.data();
    for (int64_t s = 0; s < S; ++s) {
        T* row = po + s * D;
        for (int64_t e = offsets[static_cast<size_t>(s)]; e < offsets[static_cast<size_t>(s) + 1]; ++e) {
            const T a = pa[e];
            const T* frow = pf + src[static_cast<size_t>(e)] * D;
            for (int64_t d = 0; d < D; ++d) row[d] += a * frow[d];
        }
    }
    if (auto* tp = tape_for<T>({&alpha, &feats})) {
        mark_output(out);
        tp->record({out.node()}, [alpha, feats, out, src, offsets, S, D]() mutable {
            const T* pd = out.grad_values().data();
            const T* pa = alpha.data();
            const T* pf = feats.data();
            T* ga = alpha.needs_grad() ? alpha.grad() : nullptr;
            T* gf = feats.needs_grad() ? feats.grad() : nullptr;
            for (int64_t s = 0; s < S; ++s) {
                const T* drow = pd + s * D;
                for (int64_t e = offsets[static_cast<size_t>(s)]; e < offsets[static_cast<size_t>(s) + 1];
                     ++e) {
                    const int64_t r = src[static_cast<size_t>(e)];
                    if (ga) {
                        T dot = T(0);
                        for (int64_t d = 0; d < D; ++d) dot += drow[d] * pf[r * D + d];
                        ga[e] += dot;
                    }
                    if (gf) {
                        const T a = pa[e];
                        for (int64_t d = 0; d < D; ++d) gf[r * D + d] += a * drow[d];
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace gcrp
