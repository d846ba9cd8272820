#pragma once

#include "core/ops.hpp"
#include "graph/grid_graph.hpp"
#include "support/rng.hpp"

namespace gcrp {

// Single-head graph attention layer keeping the input width:
//   e_ij   = LeakyReLU(l^T [W f_i || W f_j])      (i the destination)
//   a_ij   = softmax over j in N_i of e_ij
//   f'_i   = ELU(sum_j a_ij W f_j)
// l is stored split into its destination and source halves.
template <typename T>
struct GatParams {
    Tensor<T> W;      // [d, d]
    Tensor<T> l_dst;  // [d, 1]
    Tensor<T> l_src;  // [d, 1]
    T slope = T(0.2);
};

template <typename T>
GatParams<T> gat_params_init(int64_t d, Rng& rng) {
    GatParams<T> p;
    auto tn = [&rng](Shape s) {
        Tensor<T> t(std::move(s));
        for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<T>(rng.truncated_normal(0.02));
        return t;
    };
    p.W = tn({d, d});
    p.l_dst = tn({d, 1});
    p.l_src = tn({d, 1});
    return p;
}

// Attention coefficients per edge, grouped like graph.src.
template <typename T>
Tensor<T> gat_coeffs(const Tensor<T>& features, const GatParams<T>& p, const GridGraph& graph) {
    if (features.rank() != 2 || features.dim(0) != graph.n) {
        throw ValidationError("gat expects features [n, d] matching the graph");
    }
    Tensor<T> hf = matmul(features, p.W);
    Tensor<T> s_dst = matmul(hf, p.l_dst);  // [n,1]
    Tensor<T> s_src = matmul(hf, p.l_src);
    std::vector<int64_t> dst(graph.src.size());
    for (int64_t i = 0; i < graph.n; ++i) {
        for (int64_t e = graph.offsets[static_cast<size_t>(i)]; e < graph.offsets[static_cast<size_t>(i) + 1];
             ++e) {
            dst[static_cast<size_t>(e)] = i;
        }
    }
    Tensor<T> scores =
        leaky_relu(add(index_rows(s_dst, dst), index_rows(s_src, graph.src)), p.slope);
    return segment_softmax(reshape(scores, {static_cast<int64_t>(graph.src.size())}), graph.offsets);
}

template <typename T>
Tensor<T> gat_forward(const Tensor<T>& features, const GatParams<T>& p, const GridGraph& graph) {
    Tensor<T> alpha = gat_coeffs(features, p, graph);
    Tensor<T> hf = matmul(features, p.W);
    return elu(weighted_gather_sum(alpha, hf, graph.src, graph.offsets));
}

}  // namespace gcrp
