#pragma once

#include <array>

#include "core/ops_elementwise.hpp"
#include "core/ops_shape.hpp"
#include "scan/scan_order.hpp"

namespace gcrp {

// Recombines four directional scan outputs [B,L,C]: each is scattered back
// to its spatial layout through its own ordering, then the maps are summed.
template <typename T>
Tensor<T> scan_merge(const std::array<Tensor<T>, 4>& ys, const std::array<ScanOrder, 4>& orders) {
    const int64_t h = orders[0].h, w = orders[0].w;
    for (int d = 0; d < 4; ++d) {
        if (ys[static_cast<size_t>(d)].shape() != ys[0].shape()) {
            throw ValidationError("scan_merge: directional outputs disagree in shape");
        }
        if (orders[static_cast<size_t>(d)].h != h || orders[static_cast<size_t>(d)].w != w) {
            throw ValidationError("scan_merge: orders disagree in dims");
        }
    }
    Tensor<T> merged;
    for (int d = 0; d < 4; ++d) {
        Tensor<T> spatial =
            scatter_spatial(ys[static_cast<size_t>(d)], orders[static_cast<size_t>(d)].forward, h, w);
        merged = d == 0 ? spatial : add(merged, spatial);
    }
    return merged;
}

}  // namespace gcrp
