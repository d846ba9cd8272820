#include "graph/grid_graph.hpp"

#include "support/errors.hpp"

namespace gcrp {

GridGraph build_grid_graph(int64_t h, int64_t w, int connectivity) {
    if (h < 1 || w < 1) throw ValidationError("grid graph needs h, w >= 1");
    if (connectivity != 4 && connectivity != 8) {
        throw ValidationError("grid connectivity must be 4 or 8");
    }
    GridGraph g;
    g.h = h;
    g.w = w;
    g.n = h * w;
    g.connectivity = connectivity;
    g.offsets.reserve(static_cast<size_t>(g.n + 1));
    g.offsets.push_back(0);
    for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
            // (dy, dx) in raster order yields ascending source indices.
            for (int64_t dy = -1; dy <= 1; ++dy) {
                for (int64_t dx = -1; dx <= 1; ++dx) {
                    if (connectivity == 4 && dy != 0 && dx != 0) continue;
                    const int64_t yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    g.src.push_back(yy * w + xx);
                }
            }
            g.offsets.push_back(static_cast<int64_t>(g.src.size()));
        }
    }
    return g;
}

GridGraph replicate_graph(const GridGraph& g, int64_t b) {
    if (b < 1) throw ValidationError("replicate_graph needs b >= 1");
    if (b == 1) return g;
    GridGraph out;
    out.h = g.h;
    out.w = g.w;
    out.n = g.n * b;
    out.connectivity = g.connectivity;
    out.src.reserve(g.src.size() * static_cast<size_t>(b));
    out.offsets.reserve(static_cast<size_t>(out.n + 1));
    out.offsets.push_back(0);
    const int64_t edges = static_cast<int64_t>(g.src.size());
    for (int64_t k = 0; k < b; ++k) {
        for (int64_t e = 0; e < edges; ++e) out.src.push_back(g.src[static_cast<size_t>(e)] + k * g.n);
        for (int64_t i = 1; i <= g.n; ++i) {
            out.offsets.push_back(g.offsets[static_cast<size_t>(i)] + k * edges);
        }
    }
    return out;
}

}  // namespace gcrp
