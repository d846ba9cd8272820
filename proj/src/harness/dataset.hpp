#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "harness/image_io.hpp"
#include "support/rng.hpp"

namespace gcrp {

struct SamplePaths {
    std::string stem, image, mask;
};

// Pairs root/images/* with root/GT/* by stem, sorted by stem. Unpaired files
// on either side are itemized in the error.
std::vector<SamplePaths> list_dataset(const std::string& root);

// Lists the image files of a single directory, sorted by name.
std::vector<std::string> list_images(const std::string& dir);

struct Sample {
    Tensor<float> image;  // [3,S,S], normalized
    Tensor<float> mask;   // [1,S,S], values in {0,1}
};

constexpr double kNormMean[3] = {0.485, 0.456, 0.406};
constexpr double kNormStd[3] = {0.229, 0.224, 0.225};

// Resize to S (image bilinear, mask nearest so labels stay binary), optional
// flip + scale-crop augmentation driven entirely by the given seed, then
// channel normalization.
Sample load_sample(const SamplePaths& paths, int64_t size, bool augment, uint64_t seed);

// The same pipeline applied to an in-memory pair; load_sample delegates here.
Sample prepare_sample(const ImageU8& image, const ImageU8& mask, int64_t size, bool augment,
                      uint64_t seed);

// Image-only variant for inference; returns the normalized tensor.
Tensor<float> prepare_image(const ImageU8& image, int64_t size);

}  // namespace gcrp
