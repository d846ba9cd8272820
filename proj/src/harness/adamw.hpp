#pragma once

#include <cmath>
#include <vector>

#include "blocks/layers.hpp"
#include "support/errors.hpp"

namespace gcrp {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;

    void validate() const {
        if (!(lr > 0)) throw ValidationError("lr must be positive");
        if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
            throw ValidationError("adamw betas must lie in [0,1)");
        }
        if (!(eps > 0) || weight_decay < 0) throw ValidationError("bad adamw constants");
    }
};

// First/second moment buffers parallel to a fixed parameter list.
template <typename T>
struct AdamWState {
    int64_t step = 0;
    std::vector<std::vector<T>> m, v;

    static AdamWState create(const ParamList<T>& params) {
        AdamWState s;
        s.m.reserve(params.size());
        s.v.reserve(params.size());
        for (const auto& p : params) {
            s.m.emplace_back(static_cast<size_t>(p.tensor.numel()), T(0));
            s.v.emplace_back(static_cast<size_t>(p.tensor.numel()), T(0));
        }
        return s;
    }
};

// Decoupled-weight-decay Adam with bias correction. Gradients are read from
// the tensors' grad buffers; parameters update in place.
template <typename T>
void adamw_step(ParamList<T>& params, AdamWState<T>& state, const AdamWConfig& cfg) {
    cfg.validate();
    if (state.m.size() != params.size()) {
        throw ValidationError("adamw state does not match parameter list");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        if (!p.tensor.has_grad()) {
            throw ValidationError("parameter missing gradient: " + p.name);
        }
        T* w = p.tensor.data();
        const T* g = p.tensor.grad_values().data();
        T* m = state.m[i].data();
        T* v = state.v[i].data();
        const int64_t n = p.tensor.numel();
        for (int64_t j = 0; j < n; ++j) {
            const double gj = static_cast<double>(g[j]);
            if (!std::isfinite(gj)) {
                throw NumericError("non-finite gradient in parameter " + p.name);
            }
            const double mj = cfg.beta1 * static_cast<double>(m[j]) + (1.0 - cfg.beta1) * gj;
            const double vj = cfg.beta2 * static_cast<double>(v[j]) + (1.0 - cfg.beta2) * gj * gj;
            m[j] = static_cast<T>(mj);
            v[j] = static_cast<T>(vj);
            const double update = (mj / bc1) / (std::sqrt(vj / bc2) + cfg.eps) +
                                  cfg.weight_decay * static_cast<double>(w[j]);
            w[j] = static_cast<T>(static_cast<double>(w[j]) - cfg.lr * update);
        }
    }
}

}  // namespace gcrp
