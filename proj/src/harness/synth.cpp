#include "harness/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "harness/image_io.hpp"
#include "support/errors.hpp"

namespace gcrp {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Box {
    double x0, y0, x1, y1;
};

Box shape_box(const SynthShape& s) {
    return {s.cx - s.rx, s.cy - s.ry, s.cx + s.rx, s.cy + s.ry};
}

bool boxes_apart(const Box& a, const Box& b, double gap) {
    return a.x1 + gap < b.x0 || b.x1 + gap < a.x0 || a.y1 + gap < b.y0 || b.y1 + gap < a.y0;
}

}  // namespace

bool SynthShape::contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    switch (kind) {
        case ShapeKind::ellipse: {
            const double u = dx / rx, v = dy / ry;
            return u * u + v * v <= 1.0;
        }
        case ShapeKind::rectangle:
            return std::fabs(dx) <= rx && std::fabs(dy) <= ry;
        case ShapeKind::lshape: {
            if (std::fabs(dx) > rx || std::fabs(dy) > ry) return false;
            const double cw = fx * 2.0 * rx, ch = fy * 2.0 * ry;
            const bool right = corner == 1 || corner == 3;
            const bool bottom = corner == 2 || corner == 3;
            const bool in_cut_x = right ? (x >= cx + rx - cw) : (x <= cx - rx + cw);
            const bool in_cut_y = bottom ? (y >= cy + ry - ch) : (y <= cy - ry + ch);
            return !(in_cut_x && in_cut_y);
        }
    }
    return false;
}

double SynthShape::area() const {
    switch (kind) {
        case ShapeKind::ellipse:
            return kPi * rx * ry;
        case ShapeKind::rectangle:
            return 4.0 * rx * ry;
        case ShapeKind::lshape:
            return 4.0 * rx * ry * (1.0 - fx * fy);
    }
    return 0;
}

double SynthShape::perimeter() const {
    switch (kind) {
        case ShapeKind::ellipse: {
            // Ramanujan's approximation.
            const double a = rx, b = ry;
            return kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
        }
        case ShapeKind::rectangle:
            return 4.0 * (rx + ry);
        case ShapeKind::lshape:
            // An axis-aligned corner notch keeps the bounding perimeter.
            return 4.0 * (rx + ry);
    }
    return 0;
}

int64_t rasterize_shape(const SynthShape& s, std::vector<uint8_t>& mask, int64_t h, int64_t w) {
    if (mask.size() != static_cast<size_t>(h * w)) {
        throw ValidationError("mask buffer size mismatch");
    }
    const Box b = shape_box(s);
    const int64_t r0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(b.y0)));
    const int64_t r1 = std::min<int64_t>(h, static_cast<int64_t>(std::ceil(b.y1)) + 1);
    const int64_t c0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(b.x0)));
    const int64_t c1 = std::min<int64_t>(w, static_cast<int64_t>(std::ceil(b.x1)) + 1);
    int64_t painted = 0;
    for (int64_t r = r0; r < r1; ++r) {
        for (int64_t c = c0; c < c1; ++c) {
            if (!s.contains(c + 0.5, r + 0.5)) continue;
            uint8_t& px = mask[static_cast<size_t>(r * w + c)];
            if (px == 0) {
                px = 255;
                ++painted;
            }
        }
    }
    return painted;
}

SynthShape random_shape(Rng& rng, int64_t size) {
    SynthShape s;
    const int k = static_cast<int>(rng.uniform_index(3));
    s.kind = k == 0 ? ShapeKind::ellipse : (k == 1 ? ShapeKind::rectangle : ShapeKind::lshape);
    const double sz = static_cast<double>(size);
    s.rx = rng.uniform(0.08, 0.22) * sz;
    s.ry = rng.uniform(0.08, 0.22) * sz;
    s.cx = rng.uniform(s.rx + 2.0, sz - s.rx - 2.0);
    s.cy = rng.uniform(s.ry + 2.0, sz - s.ry - 2.0);
    s.corner = static_cast<int>(rng.uniform_index(4));
    s.fx = rng.uniform(0.35, 0.65);
    s.fy = rng.uniform(0.35, 0.65);
    return s;
}

void synth_dataset(const std::string& out_dir, int64_t n, int64_t size, uint64_t seed) {
    if (n < 1) throw ValidationError("synth needs n >= 1");
    if (size < 16) throw ValidationError("synth needs size >= 16");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir + "/images", ec);
    fs::create_directories(out_dir + "/GT", ec);
    if (ec) throw ValidationError("cannot create dataset directories under " + out_dir);

    for (int64_t i = 0; i < n; ++i) {
        Rng rng(Rng::derive(seed, static_cast<uint64_t>(i), 0x51));

        const int want = 1 + static_cast<int>(rng.uniform_index(3));
        std::vector<SynthShape> shapes;
        for (int k = 0; k < want; ++k) {
            // Keep shapes disjoint so the mask area stays the analytic sum.
            for (int attempt = 0; attempt < 40; ++attempt) {
                SynthShape cand = random_shape(rng, size);
                bool ok = true;
                for (const auto& other : shapes) {
                    if (!boxes_apart(shape_box(cand), shape_box(other), 2.0)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    shapes.push_back(cand);
                    break;
                }
            }
        }

        std::vector<uint8_t> mask(static_cast<size_t>(size * size), 0);
        for (const auto& s : shapes) rasterize_shape(s, mask, size, size);

        // Low-contrast textured background, clearly offset shape fills.
        double base[3], amp[3];
        for (int c = 0; c < 3; ++c) {
            base[c] = rng.uniform(70.0, 150.0);
            amp[c] = rng.uniform(4.0, 12.0);
        }
        const double freq_x = rng.uniform(0.02, 0.12);
        const double freq_y = rng.uniform(0.02, 0.12);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        std::vector<std::array<double, 3>> fills(shapes.size());
        for (size_t si = 0; si < shapes.size(); ++si) {
            const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            for (int c = 0; c < 3; ++c) {
                fills[si][static_cast<size_t>(c)] =
                    std::clamp(base[c] + sign * rng.uniform(45.0, 95.0), 0.0, 255.0);
            }
        }

        std::vector<uint8_t> rgb(static_cast<size_t>(size * size) * 3);
        for (int64_t r = 0; r < size; ++r) {
            for (int64_t c = 0; c < size; ++c) {
                const double x = c + 0.5, y = r + 0.5;
                int shape_idx = -1;
                for (size_t si = 0; si < shapes.size(); ++si) {
                    if (shapes[si].contains(x, y)) {
                        shape_idx = static_cast<int>(si);
                        break;
                    }
                }
                const double tex = std::sin(2.0 * kPi * (freq_x * x + freq_y * y) + phase);
                for (int ch = 0; ch < 3; ++ch) {
                    const double noise = rng.uniform(-8.0, 8.0);
                    double val;
                    if (shape_idx >= 0) {
                        val = fills[static_cast<size_t>(shape_idx)][static_cast<size_t>(ch)] + noise;
                    } else {
                        val = base[ch] + amp[ch] * tex + noise;
                    }
                    rgb[static_cast<size_t>((r * size + c) * 3 + ch)] =
                        static_cast<uint8_t>(std::clamp(val, 0.0, 255.0));
                }
            }
        }

        char name[32];
        std::snprintf(name, sizeof(name), "synth_%04lld", static_cast<long long>(i));
        write_rgb_png(out_dir + "/images/" + name + ".png", rgb.data(), size, size);
        write_gray_png(out_dir + "/GT/" + name + ".png", mask.data(), size, size);
    }
}

}  // namespace gcrp
