#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gcrp {

// 8-bit interleaved row-major pixels, 1 (gray) or 3 (RGB) channels.
struct ImageU8 {
    int64_t h = 0, w = 0, channels = 0;
    std::vector<uint8_t> v;

    uint8_t at(int64_t r, int64_t c, int64_t ch) const {
        return v[static_cast<size_t>((r * w + c) * channels + ch)];
    }
};

// Reads PNG or JPEG (sniffed from the file header). 16-bit, palette, and
// alpha inputs are folded down to 8-bit gray or RGB.
ImageU8 read_image(const std::string& path);

void write_gray_png(const std::string& path, const uint8_t* data, int64_t h, int64_t w);
void write_rgb_png(const std::string& path, const uint8_t* data, int64_t h, int64_t w);

bool has_image_extension(const std::string& name);

}  // namespace gcrp
