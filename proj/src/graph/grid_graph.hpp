#pragma once

#include <cstdint>
#include <vector>

namespace gcrp {

// Lattice adjacency in edge-list form. Edges are grouped by destination node
// (offsets[i]..offsets[i+1]) with sources in ascending index order; every
// node neighbors itself. The ordering is part of the contract: summations
// walk edges in list order, so two graphs with identically ordered lists
// aggregate identically.
struct GridGraph {
    int64_t h = 0, w = 0;
    int64_t n = 0;
    int connectivity = 8;
    std::vector<int64_t> src;      // source node of each edge
    std::vector<int64_t> offsets;  // [n+1], destination-grouped segments
};

GridGraph build_grid_graph(int64_t h, int64_t w, int connectivity = 8);

// Same adjacency replicated for a batch of b disjoint copies; node i of copy
// k becomes node k*n + i.
GridGraph replicate_graph(const GridGraph& g, int64_t b);

}  // namespace gcrp
