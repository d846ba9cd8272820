#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "support/rng.hpp"

namespace gcrp {

enum class ShapeKind { ellipse, rectangle, lshape };

// Axis-aligned shape in continuous image coordinates; pixel (r, c) samples
// the point (c + 0.5, r + 0.5).
struct SynthShape {
    ShapeKind kind = ShapeKind::ellipse;
    double cx = 0, cy = 0;   // center
    double rx = 0, ry = 0;   // half extents
    int corner = 0;          // lshape: which quadrant is cut (0..3)
    double fx = 0, fy = 0;   // lshape: cut fractions of the full extents

    bool contains(double x, double y) const;
    double area() const;
    double perimeter() const;
};

// Paints mask pixels whose centers fall inside the shape; returns the number
// of pixels newly turned on.
int64_t rasterize_shape(const SynthShape& s, std::vector<uint8_t>& mask, int64_t h, int64_t w);

SynthShape random_shape(Rng& rng, int64_t size);

// Writes n images under out_dir/images and exact binary masks under
// out_dir/GT, byte-identical for a given (n, size, seed).
void synth_dataset(const std::string& out_dir, int64_t n, int64_t size, uint64_t seed);

}  // namespace gcrp
