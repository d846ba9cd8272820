#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gcrp {

enum class ScanDir { rightward = 0, downward = 1, leftward = 2, upward = 3 };

const char* scan_dir_name(ScanDir d);
ScanDir scan_dir_from_name(const std::string& name);

// A spatial-to-sequence ordering: forward[t] is the flat row-major spatial
// index visited at sequence position t; inverse is its inverse permutation.
struct ScanOrder {
    std::vector<int64_t> forward;
    std::vector<int64_t> inverse;
    ScanDir dir;
    int64_t h = 0, w = 0;
    int64_t grid = 1;  // g of the g x g block partition (1 = global)
};

// Global four-direction scan: row-major rightward, column-major downward,
// and their full reversals.
std::array<ScanOrder, 4> cross_scan_orders(int64_t h, int64_t w);

// Block-partitioned four-direction scan: the map splits into a g x g grid of
// equal blocks, blocks are enumerated row-major, each direction's scan runs
// independently inside every block, and per-block sequences concatenate in
// block order. leftward/upward reverse rightward/downward within each block.
// g must divide both h and w.
std::array<ScanOrder, 4> less2d_orders(int64_t h, int64_t w, int64_t g);

// Decoder stage scale (as the denominator: 2, 4, 8, 16) to block grid size.
int64_t resolution_to_grid(int64_t scale_denominator);

}  // namespace gcrp
