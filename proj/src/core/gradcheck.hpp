#pragma once

#include <cmath>
#include <functional>

#include "core/tensor.hpp"

namespace gcrp {

// Central-difference gradient check. forward() must rebuild the graph from
// the given leaves each call and return a scalar loss. Returns the largest
// relative error |analytic - numeric| / max(|analytic|, |numeric|, floor)
// over every element of every leaf (or of the sampled subset).
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst;  // "leaf#k[i]" of the worst element
};

inline GradCheckResult check_gradients(const std::function<Tensor<double>()>& forward,
                                       std::vector<Tensor<double>> leaves, double h = 1e-4,
                                       double floor = 1e-3, int64_t max_per_leaf = 0) {
    for (auto& l : leaves) {
        l.set_requires_grad(true);
        l.zero_grad();
    }
    {
        Tape<double> tape;
        Tensor<double> loss = forward();
        tape.backward(loss);
    }
    GradCheckResult res;
    for (size_t k = 0; k < leaves.size(); ++k) {
        auto& leaf = leaves[k];
        const int64_t n = leaf.numel();
        // Evenly strided subset when a cap is given; every element otherwise.
        const int64_t step = (max_per_leaf > 0 && n > max_per_leaf) ? n / max_per_leaf : 1;
        for (int64_t i = 0; i < n; i += step) {
            const double keep = leaf.data()[i];
            leaf.data()[i] = keep + h;
            const double up = forward().item();
            leaf.data()[i] = keep - h;
            const double dn = forward().item();
            leaf.data()[i] = keep;
            const double numeric = (up - dn) / (2.0 * h);
            const double analytic = leaf.has_grad() ? leaf.grad_values()[static_cast<size_t>(i)] : 0.0;
            const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst = "leaf#" + std::to_string(k) + "[" + std::to_string(i) + "]";
            }
        }
    }
    return res;
}

}  // namespace gcrp
