#include "harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "support/errors.hpp"

namespace gcrp {

namespace fs = std::filesystem;

namespace {

std::string stem_of(const std::string& name) {
    const size_t dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

std::map<std::string, std::string> scan_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir);
    std::map<std::string, std::string> by_stem;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (!has_image_extension(name)) continue;
        const std::string stem = stem_of(name);
        if (by_stem.count(stem)) {
            throw ValidationError("duplicate stem '" + stem + "' in " + dir);
        }
        by_stem[stem] = entry.path().string();
    }
    return by_stem;
}

using Plane = std::vector<double>;

// Channel planes in [0,1]; grayscale inputs replicate to the requested count.
std::vector<Plane> to_planes(const ImageU8& img, int64_t channels) {
    std::vector<Plane> planes(static_cast<size_t>(channels),
                              Plane(static_cast<size_t>(img.h * img.w)));
    for (int64_t i = 0; i < img.h * img.w; ++i) {
        for (int64_t c = 0; c < channels; ++c) {
            const int64_t src_c = img.channels == 1 ? 0 : c;
            planes[static_cast<size_t>(c)][static_cast<size_t>(i)] =
                img.v[static_cast<size_t>(i * img.channels + src_c)] / 255.0;
        }
    }
    return planes;
}

Plane resize_bilinear_plane(const Plane& src, int64_t h, int64_t w, int64_t oh, int64_t ow) {
    Plane out(static_cast<size_t>(oh * ow));
    const double sh = static_cast<double>(h) / static_cast<double>(oh);
    const double sw = static_cast<double>(w) / static_cast<double>(ow);
    for (int64_t r = 0; r < oh; ++r) {
        double sy = (r + 0.5) * sh - 0.5;
        sy = std::max(0.0, sy);
        const int64_t y0 = std::min<int64_t>(h - 1, static_cast<int64_t>(sy));
        const int64_t y1 = std::min<int64_t>(h - 1, y0 + 1);
        const double wy = sy - static_cast<double>(y0);
        for (int64_t c = 0; c < ow; ++c) {
            double sx = (c + 0.5) * sw - 0.5;
            sx = std::max(0.0, sx);
            const int64_t x0 = std::min<int64_t>(w - 1, static_cast<int64_t>(sx));
            const int64_t x1 = std::min<int64_t>(w - 1, x0 + 1);
            const double wx = sx - static_cast<double>(x0);
            const double top = src[static_cast<size_t>(y0 * w + x0)] * (1.0 - wx) +
                               src[static_cast<size_t>(y0 * w + x1)] * wx;
            const double bot = src[static_cast<size_t>(y1 * w + x0)] * (1.0 - wx) +
                               src[static_cast<size_t>(y1 * w + x1)] * wx;
            out[static_cast<size_t>(r * ow + c)] = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

Plane resize_nearest_plane(const Plane& src, int64_t h, int64_t w, int64_t oh, int64_t ow) {
    Plane out(static_cast<size_t>(oh * ow));
    for (int64_t r = 0; r < oh; ++r) {
        const int64_t y = std::min<int64_t>(
            h - 1, static_cast<int64_t>((r + 0.5) * static_cast<double>(h) / static_cast<double>(oh)));
        for (int64_t c = 0; c < ow; ++c) {
            const int64_t x = std::min<int64_t>(
                w - 1,
                static_cast<int64_t>((c + 0.5) * static_cast<double>(w) / static_cast<double>(ow)));
            out[static_cast<size_t>(r * ow + c)] = src[static_cast<size_t>(y * w + x)];
        }
    }
    return out;
}

// Center crop when the scaled map is larger than S, center pad when smaller
// (edge replication for images, zero for masks), so image and mask stay
// geometrically aligned.
Plane center_fit(const Plane& src, int64_t s_in, int64_t s_out, bool pad_with_edge) {
    if (s_in == s_out) return src;
    Plane out(static_cast<size_t>(s_out * s_out), 0.0);
    if (s_in > s_out) {
        const int64_t off = (s_in - s_out) / 2;
        for (int64_t r = 0; r < s_out; ++r) {
            for (int64_t c = 0; c < s_out; ++c) {
                out[static_cast<size_t>(r * s_out + c)] =
                    src[static_cast<size_t>((r + off) * s_in + (c + off))];
            }
        }
    } else {
        const int64_t off = (s_out - s_in) / 2;
        for (int64_t r = 0; r < s_out; ++r) {
            for (int64_t c = 0; c < s_out; ++c) {
                const int64_t sr = r - off, sc = c - off;
                if (sr >= 0 && sr < s_in && sc >= 0 && sc < s_in) {
                    out[static_cast<size_t>(r * s_out + c)] =
                        src[static_cast<size_t>(sr * s_in + sc)];
                } else if (pad_with_edge) {
                    const int64_t cr = std::clamp<int64_t>(sr, 0, s_in - 1);
                    const int64_t cc = std::clamp<int64_t>(sc, 0, s_in - 1);
                    out[static_cast<size_t>(r * s_out + c)] =
                        src[static_cast<size_t>(cr * s_in + cc)];
                }
            }
        }
    }
    return out;
}

void flip_horizontal(Plane& p, int64_t h, int64_t w) {
    for (int64_t r = 0; r < h; ++r) {
        for (int64_t c = 0; c < w / 2; ++c) {
            std::swap(p[static_cast<size_t>(r * w + c)], p[static_cast<size_t>(r * w + (w - 1 - c))]);
        }
    }
}

}  // namespace

std::vector<SamplePaths> list_dataset(const std::string& root) {
    const auto images = scan_dir(root + "/images");
    const auto masks = scan_dir(root + "/GT");
    std::string missing;
    for (const auto& [stem, path] : images) {
        if (!masks.count(stem)) missing += "\n  no GT for " + path;
    }
    for (const auto& [stem, path] : masks) {
        if (!images.count(stem)) missing += "\n  no image for " + path;
    }
    if (!missing.empty()) throw ValidationError("unpaired dataset entries:" + missing);
    if (images.empty()) throw ValidationError("empty dataset under " + root);
    std::vector<SamplePaths> out;
    out.reserve(images.size());
    for (const auto& [stem, path] : images) {
        out.push_back({stem, path, masks.at(stem)});
    }
    return out;  // std::map iteration is already stem-sorted
}

std::vector<std::string> list_images(const std::string& dir) {
    const auto by_stem = scan_dir(dir);
    std::vector<std::string> out;
    out.reserve(by_stem.size());
    for (const auto& [stem, path] : by_stem) out.push_back(path);
    return out;
}

Sample prepare_sample(const ImageU8& image, const ImageU8& mask, int64_t size, bool augment,
                      uint64_t seed) {
    if (size < 1) throw ValidationError("sample size must be positive");
    Rng rng(seed);
    bool flip = false;
    int64_t scaled = size;
    if (augment) {
        flip = rng.bernoulli(0.5);
        const double u = rng.uniform(0.75, 1.25);
        scaled = std::max<int64_t>(1, static_cast<int64_t>(std::llround(u * static_cast<double>(size))));
    }

    std::vector<Plane> img_planes = to_planes(image, 3);
    Plane mask_plane = to_planes(mask, 1)[0];

    for (auto& p : img_planes) {
        p = resize_bilinear_plane(p, image.h, image.w, scaled, scaled);
        p = center_fit(p, scaled, size, true);
        if (flip) flip_horizontal(p, size, size);
    }
    mask_plane = resize_nearest_plane(mask_plane, mask.h, mask.w, scaled, scaled);
    mask_plane = center_fit(mask_plane, scaled, size, false);
    if (flip) flip_horizontal(mask_plane, size, size);

    Sample s;
    s.image = Tensor<float>({3, size, size});
    for (int64_t c = 0; c < 3; ++c) {
        for (int64_t i = 0; i < size * size; ++i) {
            const double v = img_planes[static_cast<size_t>(c)][static_cast<size_t>(i)];
            s.image.data()[c * size * size + i] =
                static_cast<float>((v - kNormMean[c]) / kNormStd[c]);
        }
    }
    s.mask = Tensor<float>({1, size, size});
    for (int64_t i = 0; i < size * size; ++i) {
        s.mask.data()[i] = mask_plane[static_cast<size_t>(i)] >= 0.5 ? 1.0f : 0.0f;
    }
    return s;
}

Sample load_sample(const SamplePaths& paths, int64_t size, bool augment, uint64_t seed) {
    ImageU8 image, mask;
    try {
        image = read_image(paths.image);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("sample '") + paths.stem + "': " + e.what());
    }
    try {
        mask = read_image(paths.mask);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("sample '") + paths.stem + "': " + e.what());
    }
    return prepare_sample(image, mask, size, augment, seed);
}

Tensor<float> prepare_image(const ImageU8& image, int64_t size) {
    std::vector<Plane> planes = to_planes(image, 3);
    Tensor<float> t({3, size, size});
    for (int64_t c = 0; c < 3; ++c) {
        Plane p = resize_bilinear_plane(planes[static_cast<size_t>(c)], image.h, image.w, size, size);
        for (int64_t i = 0; i < size * size; ++i) {
            t.data()[c * size * size + i] = static_cast<float>((p[static_cast<size_t>(i)] -
                                                                kNormMean[c]) /
                                                               kNormStd[c]);
        }
    }
    return t;
}

}  // namespace gcrp
