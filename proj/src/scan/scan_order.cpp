#include "scan/scan_order.hpp"

#include <algorithm>

#include "support/errors.hpp"

namespace gcrp {

const char* scan_dir_name(ScanDir d) {
    switch (d) {
        case ScanDir::rightward: return "rightward";
        case ScanDir::downward: return "downward";
        case ScanDir::leftward: return "leftward";
        case ScanDir::upward: return "upward";
    }
    return "?";
}

ScanDir scan_dir_from_name(const std::string& name) {
    for (int i = 0; i < 4; ++i) {
        if (name == scan_dir_name(static_cast<ScanDir>(i))) return static_cast<ScanDir>(i);
    }
    throw ValidationError("unknown scan direction '" + name +
                          "' (expected rightward|downward|leftward|upward)");
}

namespace {

std::vector<int64_t> invert(const std::vector<int64_t>& fwd) {
    std::vector<int64_t> inv(fwd.size());
    for (size_t i = 0; i < fwd.size(); ++i) inv[static_cast<size_t>(fwd[i])] = static_cast<int64_t>(i);
    return inv;
}

}  // namespace

std::array<ScanOrder, 4> less2d_orders(int64_t h, int64_t w, int64_t g) {
    if (h < 1 || w < 1) throw ValidationError("scan orders need h, w >= 1");
    if (g < 1 || h % g != 0 || w % g != 0) {
        throw ValidationError("block grid " + std::to_string(g) + " must divide h=" + std::to_string(h) +
                              " and w=" + std::to_string(w));
    }
    const int64_t bh = h / g, bw = w / g;
    std::array<ScanOrder, 4> out;
    for (int d = 0; d < 4; ++d) {
        out[static_cast<size_t>(d)].dir = static_cast<ScanDir>(d);
        out[static_cast<size_t>(d)].h = h;
        out[static_cast<size_t>(d)].w = w;
        out[static_cast<size_t>(d)].grid = g;
        out[static_cast<size_t>(d)].forward.reserve(static_cast<size_t>(h * w));
    }
    auto& right = out[0].forward;
    auto& down = out[1].forward;
    auto& left = out[2].forward;
    auto& up = out[3].forward;
    std::vector<int64_t> block_r, block_d;
    block_r.reserve(static_cast<size_t>(bh * bw));
    block_d.reserve(static_cast<size_t>(bh * bw));
    for (int64_t bi = 0; bi < g; ++bi) {
        for (int64_t bj = 0; bj < g; ++bj) {
            block_r.clear();
            block_d.clear();
            const int64_t y0 = bi * bh, x0 = bj * bw;
            for (int64_t r = 0; r < bh; ++r) {
                for (int64_t c = 0; c < bw; ++c) block_r.push_back((y0 + r) * w + (x0 + c));
            }
            for (int64_t c = 0; c < bw; ++c) {
                for (int64_t r = 0; r < bh; ++r) block_d.push_back((y0 + r) * w + (x0 + c));
            }
            right.insert(right.end(), block_r.begin(), block_r.end());
            down.insert(down.end(), block_d.begin(), block_d.end());
            left.insert(left.end(), block_r.rbegin(), block_r.rend());
            up.insert(up.end(), block_d.rbegin(), block_d.rend());
        }
    }
    for (auto& o : out) o.inverse = invert(o.forward);
    return out;
}

std::array<ScanOrder, 4> cross_scan_orders(int64_t h, int64_t w) { return less2d_orders(h, w, 1); }

int64_t resolution_to_grid(int64_t scale_denominator) {
    switch (scale_denominator) {
        case 16: return 1;
        case 8: return 2;
        case 4: return 4;
        case 2: return 8;
        default:
            throw ValidationError("no block grid for stage scale 1/" + std::to_string(scale_denominator));
    }
}

}  // namespace gcrp
